// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/dataset.hpp"
#include "reccheck/embedding.hpp"
#include "reccheck/metrics.hpp"
#include "reccheck/models.hpp"
#include "reccheck/report.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace reccheck {

/// Test kinds in the order `all` expands to.
const std::vector<std::string>& available_tests();

/// Builds descriptors from a comma-separated list or "all"; each test is
/// named after its kind. Throws ConfigError on unknown or repeated names.
std::vector<TestDescriptor> parse_test_list(std::string_view list);

CaseScheme case_scheme_for(Task task);

/// Throws ConfigError listing every problem: duplicate names, unknown kinds,
/// bad parameters, and catalog fields the tests need but the dataset lacks.
void check_spec(const SuiteSpec& spec, const Dataset& dataset);

struct RunOptions {
    /// Pre-trained spaces replace in-run training and mark the report
    /// non-deterministic.
    std::shared_ptr<const EmbeddingSpace> item_space;
    std::shared_ptr<const EmbeddingSpace> brand_space;
};

/// Assembles a dataset from loose sessions: split, then popularity over train.
Dataset make_dataset(const SessionSet& sessions, Catalog catalog, const SplitRule& rule);

/// Content digest over sorted train/test sessions and catalog rows.
std::string dataset_fingerprint(const Dataset& dataset);

/// Trains the item-level space the harness uses for distances and p2v.
EmbeddingSpace train_item_space(const Dataset& dataset, const EmbeddingConfig& config);
EmbeddingSpace train_brand_space(const Dataset& dataset, const EmbeddingConfig& config);

/// Runs every test of the spec against the model. Predictions are requested
/// once per unique query, in batches of spec.batch_size, and shared by all
/// tests. A test that throws is recorded as failed; the rest still run.
RecReport run_suite(const Dataset& dataset, const RecModel& model, const SuiteSpec& spec,
                      const RunOptions& options = {});

} // namespace reccheck
