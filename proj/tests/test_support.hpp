#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "morphlbl/corpus.hpp"
#include "morphlbl/model.hpp"

namespace morphlbl::testing {

// Inventory over sub-tags s0..s{m-1} with `num_tags` distinct random
// non-empty combinations. Every sub-tag is registered even if unused.
TagInventory random_inventory(int num_tags, int num_subtags, std::mt19937_64& rng);

ModelParams random_params(int num_words, int num_subtags, int dim, int order,
                          std::mt19937_64& rng, double scale = 0.5);

// History ids drawn from [0, num_words], i.e. including the padding id.
std::vector<WordId> random_history(const ModelParams& params, std::mt19937_64& rng);

std::vector<Example> random_batch(const ModelParams& params, int num_tags, int size,
                                  double labeled_probability, std::mt19937_64& rng);

// Central differences of log_likelihood, one parameter at a time.
ModelParams finite_difference_gradient(const std::vector<Example>& batch, ModelParams params,
                                       const Eigen::MatrixXd& tag_features, ModelKind kind,
                                       double step = 1e-5);

// ||a - b|| / max(||a||, ||b||, floor), per parameter block.
std::map<std::string, double> block_relative_errors(const ModelParams& a, const ModelParams& b,
                                                    double floor = 1e-10);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace morphlbl::testing
