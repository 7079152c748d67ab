// Copyright 2026 The llmroute Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark: the serial reference session loop vs the OpenMP kernel, on a
// scaled-up weight study. Also asserts the two produce byte-identical CSV.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "llmroute/harness.hpp"

using namespace llmroute;

namespace {

double time_run(const ExperimentSpec& spec, int threads, std::string* csv) {
  const auto start = std::chrono::steady_clock::now();
  *csv = weight_study_csv(run_weight_study(spec, threads));
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentSpec spec = default_cost_study_spec();
  spec.num_sessions = 32;
  spec.queries_per_session = 2000;
  if (argc > 1) spec.num_sessions = std::stoull(argv[1]);
  if (argc > 2) spec.queries_per_session = std::stoull(argv[2]);

  const std::size_t total_rounds = spec.policy_grid.size() * spec.num_sessions *
                                   spec.queries_per_session;
  std::printf("weight study: %zu variants x %llu sessions x %llu rounds (%zu rounds total)\n",
              spec.policy_grid.size(),
              static_cast<unsigned long long>(spec.num_sessions),
              static_cast<unsigned long long>(spec.queries_per_session),
              total_rounds);

  std::string serial_csv;
  const double serial_s = time_run(spec, 1, &serial_csv);
  std::printf("  serial reference: %8.3f s  (%.2f Mrounds/s)\n", serial_s,
              total_rounds / serial_s / 1e6);

#ifdef _OPENMP
  const int workers = omp_get_max_threads();
#else
  const int workers = 1;
#endif
  std::string parallel_csv;
  const double parallel_s = time_run(spec, 0, &parallel_csv);
  std::printf("  openmp (%d threads): %6.3f s  (%.2f Mrounds/s)\n", workers,
              parallel_s, total_rounds / parallel_s / 1e6);
  std::printf("  speedup: %.2fx\n", serial_s / parallel_s);

  if (serial_csv != parallel_csv) {
    std::printf("MISMATCH: serial and parallel CSV differ\n");
    return 1;
  }
  std::printf("  outputs byte-identical: yes\n");
  return 0;
}
