#pragma once

#include <cstdint>

#include "hemrt/domain.hpp"

namespace hemrt {

// Converts training work into simulated time and joules. Defaults sit inside
// a ~10 W edge-board power envelope with the GPU as the dominant dynamic
// draw and swap I/O at about 0.1 W while the channel is busy.
struct CostModel {
  double seconds_per_sample_step = 0.5e-3;
  double gpu_dynamic_watts = 5.0;
  double static_watts = 4.0;
  double io_active_watts = 0.1;
  // Extra RAM power per 1000 resident training samples. A linear stand-in;
  // real boards couple this to the device.
  double ram_watts_per_1k_samples = 0.05;

  // Throws std::invalid_argument on negative terms or a GPU draw that is not
  // the largest dynamic term.
  void validate() const;

  [[nodiscard]] double epoch_seconds(std::int64_t n_samples) const noexcept {
    return static_cast<double>(n_samples) * seconds_per_sample_step;
  }
  // Joules for training on `n_samples` for `epochs` epochs with swap I/O busy
  // for `io_fraction` of the time. Used to extrapolate profiled confs.
  [[nodiscard]] double training_energy(std::int64_t n_samples, int epochs,
                                       double io_fraction = 1.0) const noexcept;
};

// One epoch over `n_samples`: GPU and static power over the epoch time, I/O
// power over `swap_active_seconds`, RAM power scaled by resident samples.
void charge_epoch(const CostModel& cost, std::int64_t n_samples, double swap_active_seconds,
                  EnergyLedger& ledger);

// Profiling training work (in sample-steps) billed to the overhead component.
void charge_profiling(const CostModel& cost, std::int64_t sample_steps,
                      std::int64_t resident_samples, EnergyLedger& ledger);

}  // namespace hemrt
