#ifndef TYPEGRAPH_CLI_HPP
#define TYPEGRAPH_CLI_HPP

#include <string>
#include <vector>

#include "typegraph/trainer.hpp"

namespace typegraph {

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 usage, 2 input error, 3 internal error.
int cli_run(const std::vector<std::string>& args);

/// Load `corpus_dir/{train,val,test}/<project>/**.ts` into extracted graphs.
Corpus load_corpus(const std::string& corpus_dir);

/// Load one project directory (every .ts file, path-sorted).
Project load_project_dir(const std::string& dir);

}  // namespace typegraph

#endif
