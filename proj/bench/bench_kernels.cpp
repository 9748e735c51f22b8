// Serial reference vs OpenMP kernel timings on the built-in scenario.
//   bench_kernels [repeats] [threads]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "porttfidf/corpus.hpp"
#include "porttfidf/scoring.hpp"
#include "porttfidf/synth.hpp"

using namespace porttfidf;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

template <typename T>
void keep(const T& v) {
  asm volatile("" : : "r"(&v) : "memory");
}

void row(const char* name, bool same, double serial, double parallel) {
  std::printf("%-18s %10.1f %10.1f %8.2fx  %s\n", name, serial, parallel, serial / parallel, same ? "same" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  if (argc > 2) omp_set_num_threads(std::max(1, std::atoi(argv[2])));

  const auto spec = synth::paper_scenario();
  std::printf("threads %d, best of %d\n", omp_get_max_threads(), repeats);
  std::printf("%-18s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  synth::Scenario serial_sc, omp_sc;
  const double g_ser = best_of(repeats, [&] { serial_sc = synth::reference::generate(spec); });
  const double g_omp = best_of(repeats, [&] { omp_sc = synth::generate(spec); });
  row("generate", serial_sc.records == omp_sc.records, g_ser, g_omp);
  const auto& records = omp_sc.records;

  const std::string text = synth::records_to_ndjson(records);
  std::vector<AccessRecord> p_ser, p_omp;
  const double r_ser = best_of(repeats, [&] { p_ser = reference::parse_records(text, RecordFormat::Ndjson); });
  const double r_omp = best_of(repeats, [&] { p_omp = parse_records(text, RecordFormat::Ndjson); });
  row("parse ndjson", p_ser == p_omp, r_ser, r_omp);

  Corpus d_ser, d_omp;
  const double a_ser = best_of(repeats, [&] { d_ser = reference::aggregate_daily(records, Protocol::Tcp); });
  const double a_omp = best_of(repeats, [&] { d_omp = aggregate_daily(records, Protocol::Tcp); });
  row("aggregate daily", d_ser == d_omp, a_ser, a_omp);

  HourlySeries h_ser, h_omp;
  const double h1 = best_of(repeats, [&] { h_ser = reference::aggregate_hourly(records, Protocol::Udp); });
  const double h2 = best_of(repeats, [&] { h_omp = aggregate_hourly(records, Protocol::Udp); });
  row("aggregate hourly", h_ser == h_omp, h1, h2);

  // raw corpus: every port survives, so each window holds thousands of ports
  ScoringConfig cfg;
  std::vector<TfidfRanking> s_ser, s_omp;
  const double s1 = best_of(repeats, [&] { s_ser = reference::sliding_scan(d_omp, cfg); });
  const double s2 = best_of(repeats, [&] { s_omp = sliding_scan(d_omp, cfg); });
  row("sliding scan", s_ser == s_omp, s1, s2);

  keep(p_omp);
  return 0;
}
