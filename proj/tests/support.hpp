#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "pks/pks.hpp"

namespace testing_support {

inline pks::Field from_vector(const pks::TorusGrid& grid, const std::vector<double>& v) {
  return pks::Field(grid, pks::RealBuffer(v.begin(), v.end()));
}

inline std::vector<double> to_vector(const pks::Field& f) { return {f.values().begin(), f.values().end()}; }

inline pks::Field noise(const pks::TorusGrid& grid, std::mt19937_64& rng) {
  return from_vector(grid, oracle::uniform_samples(rng, grid.size()));
}

inline pks::Field trig_field(const pks::TorusGrid& grid, const oracle::TrigPoly& p) {
  return pks::Field::sample(grid, [&p](double x, double y, double z) { return p(x, y, z); });
}

inline double max_diff(const pks::Field& a, const pks::Field& b) {
  return oracle::max_abs_diff(to_vector(a), to_vector(b));
}

}  // namespace testing_support
