"""ADX/SAR recurrences on the deterministic 40-day bar series used by test_indicators.cpp."""
import math

N, TAU = 40, 14
high = [100 + 5 * math.sin(0.3 * t) + 0.1 * t + 1 for t in range(N)]
low = [high[t] - 2 - math.cos(t) ** 2 for t in range(N)]
close = [(high[t] + low[t]) / 2 + 0.5 * math.sin(1.7 * t) for t in range(N)]

def smooth(raw, first):
    out = [None] * N
    seed = first + TAU
    out[seed] = sum(raw[first:first + TAU]) / TAU
    for t in range(seed + 1, N):
        out[t] = ((TAU - 1) * out[t - 1] + raw[t]) / TAU
    return out

tr = [None] + [max(high[t] - low[t], abs(high[t] - close[t - 1]), abs(low[t] - close[t - 1])) for t in range(1, N)]
pdm = [None] + [max(high[t] - high[t - 1], 0) for t in range(1, N)]
mdm = [None] + [max(low[t - 1] - low[t], 0) for t in range(1, N)]
s_tr, s_p, s_m = smooth(tr, 1), smooth(pdm, 1), smooth(mdm, 1)
spdi = [None] * N; smdi = [None] * N; dx = [None] * N
for t in range(TAU + 1, N):
    spdi[t] = 100 * s_p[t] / s_tr[t]
    smdi[t] = 100 * s_m[t] / s_tr[t]
    dx[t] = 100 * abs(spdi[t] - smdi[t]) / (spdi[t] + smdi[t])
adx = smooth(dx, TAU + 1)

up = close[3] >= close[0]
sar = [None] * N; ep = [None] * N
sar[4] = min(low[1:5]) if up else max(high[1:5])
ep[4] = max(high[1:5]) if up else min(low[1:5])
af = 0.02
for t in range(5, N):
    s = sar[t - 1] + af * (ep[t - 1] - sar[t - 1])
    if (up and low[t] < s) or (not up and high[t] > s):
        up = not up
        s = ep[t - 1]
        e = max(high[t - 3:t + 1]) if up else min(low[t - 3:t + 1])
        af = 0.02
    else:
        e = max(high[t - 3:t + 1]) if up else min(low[t - 3:t + 1])
        if e != ep[t - 1]:
            af = min(af + 0.02, 0.2)
    sar[t], ep[t] = s, e

for t in (15, 20, 29, 35, 39):
    print(f"t={t} spdi={spdi[t]!r} smdi={smdi[t]!r} dx={dx[t]!r}")
for t in (29, 35, 39):
    print(f"t={t} adx={adx[t]!r}")
for t in (4, 5, 10, 20, 30, 39):
    print(f"t={t} sar={sar[t]!r}")
