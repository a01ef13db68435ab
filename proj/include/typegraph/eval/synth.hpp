#ifndef TYPEGRAPH_EVAL_SYNTH_HPP
#define TYPEGRAPH_EVAL_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "typegraph/trainer.hpp"

namespace typegraph {

/// Knobs for the synthetic project generator. Generated sources stay inside
/// the supported language subset and collectively exercise every hyperedge
/// kind; `name_correlation` is the probability that a variable's name shares
/// tokens with its declared type.
struct SyntheticSpec {
    int train_projects = 60;
    int val_projects = 10;
    int test_projects = 10;
    int classes_per_project = 3;
    int fields_per_class = 3;
    int functions_per_project = 4;
    double name_correlation = 0.7;
    std::uint64_t seed = 0;
};

struct SyntheticProject {
    std::string id;
    std::string source;
};

struct SyntheticCorpus {
    std::vector<SyntheticProject> train, val, test;
};

SyntheticCorpus generate_sources(const SyntheticSpec& spec);

/// Parse + lower + extract one project from source text.
Project project_from_source(const std::string& id, const std::string& source);

Corpus corpus_from_sources(const SyntheticCorpus& src);

}  // namespace typegraph

#endif
