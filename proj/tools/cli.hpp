#pragma once

#include "aitd/corpus.hpp"
#include "aitd/metrics.hpp"
#include "aitd/pipeline.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace aitd::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

struct Evaluation {
    EvalReport report;
    std::vector<RankedModel> ranking;
    std::string report_json;
    std::string table;
};

/// The evaluate command body, separated so tests can inject stub predictors.
Evaluation evaluate_corpus(const Predictor& predictor, const Corpus& labeled, const std::string& name,
                           std::vector<RankedModel> others);

} // namespace aitd::cli
