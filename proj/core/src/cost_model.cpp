#include "hemrt/cost_model.hpp"

#include <stdexcept>

namespace hemrt {

void CostModel::validate() const {
  if (!(seconds_per_sample_step > 0.0))
    throw std::invalid_argument("seconds_per_sample_step must be positive");
  if (gpu_dynamic_watts < 0.0 || static_watts < 0.0 || io_active_watts < 0.0 ||
      ram_watts_per_1k_samples < 0.0)
    throw std::invalid_argument("power terms must be non-negative");
  if (gpu_dynamic_watts < io_active_watts)
    throw std::invalid_argument("GPU must be the dominant dynamic power term");
}

double CostModel::training_energy(std::int64_t n_samples, int epochs,
                                  double io_fraction) const noexcept {
  const double t = epoch_seconds(n_samples) * epochs;
  const double ram = ram_watts_per_1k_samples * static_cast<double>(n_samples) / 1000.0;
  return (gpu_dynamic_watts + static_watts + ram + io_active_watts * io_fraction) * t;
}

void charge_epoch(const CostModel& cost, std::int64_t n_samples, double swap_active_seconds,
                  EnergyLedger& ledger) {
  const double t = cost.epoch_seconds(n_samples);
  ledger.add(EnergyComponent::GpuDynamic, cost.gpu_dynamic_watts * t);
  ledger.add(EnergyComponent::Static, cost.static_watts * t);
  ledger.add(EnergyComponent::Io, cost.io_active_watts * swap_active_seconds);
  ledger.add(EnergyComponent::Ram,
             cost.ram_watts_per_1k_samples * static_cast<double>(n_samples) / 1000.0 * t);
  ledger.add_wall_time(t);
}

void charge_profiling(const CostModel& cost, std::int64_t sample_steps,
                      std::int64_t resident_samples, EnergyLedger& ledger) {
  const double t = cost.epoch_seconds(sample_steps);
  const double ram =
      cost.ram_watts_per_1k_samples * static_cast<double>(resident_samples) / 1000.0;
  ledger.add(EnergyComponent::Profiling,
             (cost.gpu_dynamic_watts + cost.static_watts + ram) * t);
}

}  // namespace hemrt
