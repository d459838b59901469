// Writes a synthetic dataset in the Kaggle NYSE layout for demos and tests.

#include "synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic prices.csv and fundamentals.csv", "make_synthetic_dataset"};
  std::string dir;
  aic::synthetic::Options opt;
  std::vector<std::string> incomplete, no_fundamentals;
  std::string start;
  app.add_option("dir", dir, "Output directory")->required();
  app.add_option("--symbols", opt.symbols, "Tickers")->delimiter(',');
  app.add_option("--days", opt.days, "Trading days");
  app.add_option("--start", start, "First trading day (YYYY-MM-DD)");
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_option("--incomplete", incomplete, "Tickers missing one day")->delimiter(',');
  app.add_option("--no-fundamentals", no_fundamentals, "Tickers without fundamentals")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  if (!start.empty()) opt.start = aic::parse_date(start);
  opt.incomplete.insert(incomplete.begin(), incomplete.end());
  opt.no_fundamentals.insert(no_fundamentals.begin(), no_fundamentals.end());
  aic::synthetic::write_dataset(dir, opt);
  std::cout << dir << '\n';
  return 0;
}
