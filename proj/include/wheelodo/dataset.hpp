#pragma once

#include <map>
#include <string>
#include <vector>

#include "wheelodo/drive.hpp"
#include "wheelodo/error.hpp"

namespace wheelodo {

enum class DomainRole { Source, Target };

inline std::string to_string(DomainRole r) { return r == DomainRole::Source ? "source" : "target"; }

/// One vehicle's recordings, partitioned for training, adaptation and testing.
struct DomainDataset {
  std::string domain_id;
  std::string vehicle_id;
  DomainRole role = DomainRole::Source;
  std::map<std::string, std::string> state_tags;  // tyre pressure, vehicle model, ...
  std::vector<DriveRecord> train;
  std::vector<DriveRecord> adapt;  // empty: the head of `train` is used
  std::vector<DriveRecord> test;

  bool empty() const { return train.empty() && adapt.empty() && test.empty(); }

  bool operator==(const DomainDataset&) const = default;
};

enum class Partition { Train, Adapt, Test };

inline const std::vector<DriveRecord>& require_partition(const DomainDataset& d, Partition p) {
  const auto& drives = p == Partition::Train ? d.train : (p == Partition::Adapt ? d.adapt : d.test);
  if (drives.empty()) {
    const char* name = p == Partition::Train ? "train" : (p == Partition::Adapt ? "adapt" : "test");
    fail(Errc::EmptyPartition, "domain '" + d.domain_id + "' has no " + name + " drives");
  }
  return drives;
}

}  // namespace wheelodo
