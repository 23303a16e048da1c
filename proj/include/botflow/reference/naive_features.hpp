#pragma once

#include <span>

#include "botflow/featurize.hpp"

namespace botflow::reference {

/// Brute-force twin of featurize_dataset, kept as the serial oracle for
/// tests and the benchmark. For every (entity, window, bucket, direction)
/// it re-filters the whole record list by predicate and recomputes each
/// statistic with its own loop; it shares only the schema names and
/// bucket table with the optimized path.
botflow::FeatureMatrix featurize_dataset_naive(
    std::span<const botflow::ConnRecord> records,
    const botflow::ScenarioSpec& spec, const botflow::FeaturizeConfig& cfg);

}  // namespace botflow::reference
