#include "survscore/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "survscore/util.hpp"

namespace survscore {

SurvivalDataset SurvivalDataset::make(std::vector<SurvivalRecord> records, int num_causes) {
  if (records.empty()) throw std::invalid_argument("dataset: no records");
  const int p = static_cast<int>(records.front().features.size());
  int max_cause = 1;
  int events = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i) + ": ";
    if (static_cast<int>(r.features.size()) != p) {
      throw std::invalid_argument("dataset: " + where + "inconsistent feature count");
    }
    if (!(r.time > 0.0) || !std::isfinite(r.time)) {
      throw std::invalid_argument("dataset: " + where + "time must be positive and finite");
    }
    for (double x : r.features) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("dataset: " + where + "non-finite feature");
      }
    }
    if (r.status != 0 && r.status != 1) {
      throw std::invalid_argument("dataset: " + where + "status must be 0 or 1");
    }
    if (r.status == 1) {
      ++events;
      if (r.cause < 1) {
        throw std::invalid_argument("dataset: " + where + "event cause must be >= 1");
      }
      max_cause = std::max(max_cause, r.cause);
    }
  }
  if (events == 0) throw std::invalid_argument("dataset: no events");
  if (num_causes == 0) {
    num_causes = max_cause;
  } else if (max_cause > num_causes) {
    throw std::invalid_argument("dataset: observed cause exceeds declared cause count");
  }

  SurvivalDataset d;
  d.records_ = std::move(records);
  d.p_ = p;
  d.k_ = num_causes;
  return d;
}

std::vector<double> SurvivalDataset::observed_times() const {
  std::vector<double> t;
  t.reserve(records_.size());
  for (const auto& r : records_) t.push_back(r.time);
  return t;
}

int SurvivalDataset::event_count() const {
  int c = 0;
  for (const auto& r : records_) c += r.status;
  return c;
}

int SurvivalDataset::event_count(int cause) const {
  int c = 0;
  for (const auto& r : records_) c += (r.status == 1 && r.cause == cause) ? 1 : 0;
  return c;
}

double SurvivalDataset::censoring_fraction() const {
  return 1.0 - static_cast<double>(event_count()) / n();
}

SurvivalDataset SurvivalDataset::subset(std::span<const int> indices) const {
  std::vector<SurvivalRecord> out;
  out.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || i >= n()) throw std::out_of_range("dataset subset: index out of range");
    out.push_back(records_[static_cast<std::size_t>(i)]);
  }
  return make(std::move(out), k_);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t')) {
      cell.pop_back();
    }
    std::size_t start = 0;
    while (start < cell.size() && (cell[start] == ' ' || cell[start] == '\t')) ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  if (cell.empty()) {
    throw std::runtime_error("csv row " + std::to_string(row) + ": missing value in column '" +
                             column + "'");
  }
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != cell.size()) {
    throw std::runtime_error("csv row " + std::to_string(row) + ": non-numeric value '" + cell +
                             "' in column '" + column + "'");
  }
  return v;
}

int parse_int_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const double v = parse_cell(cell, row, column);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-9) {
    throw std::runtime_error("csv row " + std::to_string(row) + ": column '" + column +
                             "' must be an integer, got '" + cell + "'");
  }
  return i;
}

}  // namespace

SurvivalDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv file is empty: " + path.string());
  const std::vector<std::string> header = split_line(line);

  auto column_index = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };

  const int time_col = column_index(schema.time_column);
  const int status_col = column_index(schema.status_column);
  const int cause_col = column_index(schema.cause_column);
  if (time_col < 0) throw std::runtime_error("csv: missing column '" + schema.time_column + "'");
  if (status_col < 0) {
    throw std::runtime_error("csv: missing column '" + schema.status_column + "'");
  }

  std::vector<int> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      const int ic = static_cast<int>(i);
      if (ic != time_col && ic != status_col && ic != cause_col) feature_cols.push_back(ic);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      const int ic = column_index(name);
      if (ic < 0) throw std::runtime_error("csv: missing feature column '" + name + "'");
      feature_cols.push_back(ic);
    }
  }

  std::vector<SurvivalRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("csv row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    }
    SurvivalRecord r;
    r.time = parse_cell(cells[time_col], row, schema.time_column);
    r.status = parse_int_cell(cells[status_col], row, schema.status_column);
    if (cause_col >= 0) r.cause = parse_int_cell(cells[cause_col], row, schema.cause_column);
    if (!(r.time > 0.0)) {
      throw std::runtime_error("csv row " + std::to_string(row) + ": time must be > 0");
    }
    if (r.status != 0 && r.status != 1) {
      throw std::runtime_error("csv row " + std::to_string(row) + ": status must be 0 or 1");
    }
    r.features.reserve(feature_cols.size());
    for (int fc : feature_cols) {
      r.features.push_back(parse_cell(cells[fc], row, header[fc]));
    }
    records.push_back(std::move(r));
  }
  return SurvivalDataset::make(std::move(records));
}

void write_csv(const std::filesystem::path& path, const SurvivalDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path.string());
  const bool with_cause = data.num_causes() > 1;
  out << "time,status";
  if (with_cause) out << ",cause";
  for (int j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (const auto& r : data.records()) {
    out << format_double(r.time) << "," << r.status;
    if (with_cause) out << "," << r.cause;
    for (double x : r.features) out << "," << format_double(x);
    out << "\n";
  }
}

SplitResult split(const SurvivalDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0, 1)");
  }
  const int n = data.n();
  const int n_train = static_cast<int>(std::lround(train_fraction * n));
  if (n_train < 1 || n_train >= n) {
    throw std::invalid_argument("split: fraction leaves an empty part");
  }

  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

  std::mt19937_64 rng(seed);
  constexpr int max_attempts = 64;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::shuffle(idx.begin(), idx.end(), rng);
    bool train_has_event = false, test_has_event = false;
    for (int i = 0; i < n; ++i) {
      if (data[idx[static_cast<std::size_t>(i)]].status == 1) {
        (i < n_train ? train_has_event : test_has_event) = true;
      }
    }
    if (train_has_event && test_has_event) {
      SplitResult out;
      out.train_indices.assign(idx.begin(), idx.begin() + n_train);
      out.test_indices.assign(idx.begin() + n_train, idx.end());
      out.train = data.subset(out.train_indices);
      out.test = data.subset(out.test_indices);
      return out;
    }
  }
  throw std::runtime_error("split: could not place an event in both parts");
}

}  // namespace survscore
