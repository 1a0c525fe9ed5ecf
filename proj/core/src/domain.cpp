#include "hemrt/domain.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace hemrt {

SampleRef make_sample(SampleId id, ClassId label, std::vector<float> features,
                      std::uint32_t size_bytes) {
  return std::make_shared<const Sample>(
      Sample{id, label, std::move(features), size_bytes});
}

bool is_valid_conf(Conf conf, std::int64_t step) noexcept {
  if (step <= 0) return false;
  if (conf.sb_size < 0 || conf.em_size < 0) return false;
  if (conf.total() < 1) return false;
  return conf.sb_size % step == 0 && conf.em_size % step == 0;
}

void validate_conf(Conf conf, std::int64_t step) {
  if (step <= 0) throw std::invalid_argument("sizing step must be positive");
  if (conf.sb_size < 0 || conf.em_size < 0)
    throw std::invalid_argument("conf sizes must be non-negative: " +
                                to_string(conf));
  if (conf.total() < 1)
    throw std::invalid_argument("conf must hold at least one sample");
  if (conf.sb_size % step != 0 || conf.em_size % step != 0)
    throw std::invalid_argument(
        fmt::format("conf {} is not a multiple of step {}", to_string(conf), step));
}

std::string to_string(Conf conf) {
  return fmt::format("({}, {})", conf.sb_size, conf.em_size);
}

std::string_view to_string(IoState state) noexcept {
  switch (state) {
    case IoState::Congested: return "Congested";
    case IoState::Idle: return "Idle";
    case IoState::Stable: return "Stable";
  }
  return "?";
}

std::string_view to_string(EnergyComponent component) noexcept {
  switch (component) {
    case EnergyComponent::GpuDynamic: return "gpu_dynamic";
    case EnergyComponent::Static: return "static";
    case EnergyComponent::Io: return "io";
    case EnergyComponent::Ram: return "ram";
    case EnergyComponent::Profiling: return "profiling";
  }
  return "?";
}

void EnergyLedger::add(EnergyComponent component, double joules) {
  if (!std::isfinite(joules) || joules < 0.0)
    throw std::invalid_argument(fmt::format(
        "ledger entries must be finite and non-negative (got {} J for {})",
        joules, to_string(component)));
  joules_[static_cast<std::size_t>(component)] += joules;
  total_ += joules;
}

void EnergyLedger::add_wall_time(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0)
    throw std::invalid_argument("wall time increments must be non-negative");
  wall_time_ += seconds;
}

double EnergyLedger::sum_of_components() const noexcept {
  double sum = 0.0;
  for (double j : joules_) sum += j;
  return sum;
}

double EnergyLedger::training_total() const noexcept {
  return sum_of_components() - component(EnergyComponent::Profiling);
}

void EnergyLedger::merge(const EnergyLedger& other) {
  for (std::size_t i = 0; i < kEnergyComponentCount; ++i)
    add(static_cast<EnergyComponent>(i), other.joules_[i]);
  add_wall_time(other.wall_time_);
}

StreamReport validate_stream(std::span<const Task> tasks, StreamKind kind) {
  if (tasks.empty()) throw std::invalid_argument("stream has no tasks");
  for (const Task& task : tasks) {
    if (task.samples.empty())
      throw std::invalid_argument(
          fmt::format("task {} has zero samples", task.task_id));
  }

  StreamReport report;
  report.task_count = tasks.size();
  report.feature_dim = tasks.front().samples.front()->features.size();
  report.sample_bytes = tasks.front().samples.front()->size_bytes;

  std::map<ClassId, int> owner;  // class -> first task declaring it
  std::unordered_set<SampleId> ids;
  for (const Task& task : tasks) {
    if (kind == StreamKind::ClassIncremental) {
      for (ClassId c : task.class_set) {
        auto [it, inserted] = owner.emplace(c, task.task_id);
        if (!inserted)
          report.issues.push_back(
              {StreamIssue::Kind::SharedClass, task.task_id,
               fmt::format("class {} already declared by task {}", c, it->second)});
      }
    }
    for (const SampleRef& s : task.samples) {
      ++report.sample_count;
      if (!ids.insert(s->id).second)
        report.issues.push_back({StreamIssue::Kind::DuplicateId, task.task_id,
                                 fmt::format("sample id {} repeated", s->id)});
      if (s->features.size() != report.feature_dim)
        report.issues.push_back(
            {StreamIssue::Kind::DimensionMismatch, task.task_id,
             fmt::format("sample {} has {} features, stream declares {}", s->id,
                         s->features.size(), report.feature_dim)});
      if (s->size_bytes == 0)
        report.issues.push_back({StreamIssue::Kind::NonPositiveSize,
                                 task.task_id,
                                 fmt::format("sample {} has size 0", s->id)});
      else if (s->size_bytes != report.sample_bytes)
        report.issues.push_back(
            {StreamIssue::Kind::SizeMismatch, task.task_id,
             fmt::format("sample {} is {} bytes, stream uses {}", s->id,
                         s->size_bytes, report.sample_bytes)});
      if (!task.class_set.contains(s->class_label))
        report.issues.push_back(
            {StreamIssue::Kind::LabelOutsideClassSet, task.task_id,
             fmt::format("sample {} has label {} outside the task class set",
                         s->id, s->class_label)});
    }
  }
  return report;
}

}  // namespace hemrt
