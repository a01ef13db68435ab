#include <cctype>

#include "typegraph/graph/extract.hpp"

namespace typegraph {

std::vector<std::string> tokenize_identifier(const std::string& name) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < name.size(); ++i) {
        char c = name[i];
        if (c == '_' || c == '$') {
            flush();
            continue;
        }
        if (std::isupper((unsigned char)c)) {
            // boundary on lower->upper and on the last upper of an acronym run
            bool prev_lower = i > 0 && (std::islower((unsigned char)name[i - 1]) ||
                                        std::isdigit((unsigned char)name[i - 1]));
            bool next_lower = i + 1 < name.size() && std::islower((unsigned char)name[i + 1]);
            if (prev_lower || (next_lower && !cur.empty())) flush();
            cur += char(std::tolower((unsigned char)c));
        } else {
            cur += char(std::tolower((unsigned char)c));
        }
    }
    flush();
    return tokens;
}

}  // namespace typegraph
