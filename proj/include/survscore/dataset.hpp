#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace survscore {

// One right-censored observation: time = min(event, censoring) > 0,
// status = 1 iff the event was observed, cause in {1..K} for events.
struct SurvivalRecord {
  double time = 0.0;
  int status = 0;
  int cause = 1;
  std::vector<double> features;
};

class SurvivalDataset {
 public:
  SurvivalDataset() = default;

  // Validates: n >= 1, uniform feature length, time > 0, status in {0,1},
  // event causes in {1..num_causes}, and at least one event. num_causes = 0
  // infers K from the largest observed event cause.
  static SurvivalDataset make(std::vector<SurvivalRecord> records, int num_causes = 0);

  int n() const { return static_cast<int>(records_.size()); }
  int p() const { return p_; }
  int num_causes() const { return k_; }
  const SurvivalRecord& operator[](int i) const { return records_[i]; }
  const std::vector<SurvivalRecord>& records() const { return records_; }

  std::vector<double> observed_times() const;
  int event_count() const;
  int event_count(int cause) const;
  double censoring_fraction() const;

  SurvivalDataset subset(std::span<const int> indices) const;

 private:
  std::vector<SurvivalRecord> records_;
  int p_ = 0;
  int k_ = 1;
};

struct CsvSchema {
  std::string time_column = "time";
  std::string status_column = "status";
  std::string cause_column = "cause";  // optional in the file
  std::vector<std::string> feature_columns;  // empty: every remaining column
};

SurvivalDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
void write_csv(const std::filesystem::path& path, const SurvivalDataset& data);

struct SplitResult {
  SurvivalDataset train;
  SurvivalDataset test;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

// Seeded shuffle split. Both halves are guaranteed at least one event; the
// shuffle is retried (bounded) if a half comes out event-free.
SplitResult split(const SurvivalDataset& data, double train_fraction, std::uint64_t seed);

}  // namespace survscore
