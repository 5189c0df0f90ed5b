#include "ailboost/table.hpp"

#include <algorithm>
#include <cmath>

namespace ailboost {

double inner_product(const StateActionTable& lhs, const StateActionTable& rhs) {
    if (!lhs.same_shape(rhs)) {
        throw Error("inner_product: shape mismatch");
    }
    double acc = 0.0;
    auto l = lhs.values();
    auto r = rhs.values();
    for (std::size_t i = 0; i < l.size(); ++i) {
        acc += l[i] * r[i];
    }
    return acc;
}

double max_abs_diff(const StateActionTable& lhs, const StateActionTable& rhs) {
    if (!lhs.same_shape(rhs)) {
        throw Error("max_abs_diff: shape mismatch");
    }
    double worst = 0.0;
    auto l = lhs.values();
    auto r = rhs.values();
    for (std::size_t i = 0; i < l.size(); ++i) {
        worst = std::max(worst, std::abs(l[i] - r[i]));
    }
    return worst;
}

double total(const StateActionTable& table) {
    double acc = 0.0;
    for (double x : table.values()) {
        acc += x;
    }
    return acc;
}

bool all_finite(const StateActionTable& table) {
    return std::all_of(table.values().begin(), table.values().end(),
                       [](double x) { return std::isfinite(x); });
}

}  // namespace ailboost
