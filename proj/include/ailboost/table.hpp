#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ailboost {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major S x A table of reals. Backs policies, occupancies,
/// rewards, Q functions and discriminators.
class StateActionTable {
public:
    StateActionTable() = default;
    StateActionTable(int num_states, int num_actions, double fill = 0.0)
        : num_states_(num_states), num_actions_(num_actions), data_(checked_size(num_states, num_actions), fill) {}

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int s, int a) { return data_[index(s, a)]; }
    double operator()(int s, int a) const { return data_[index(s, a)]; }

    std::span<double> row(int s) {
        return {data_.data() + static_cast<std::size_t>(s) * num_actions_,
                static_cast<std::size_t>(num_actions_)};
    }
    std::span<const double> row(int s) const {
        return {data_.data() + static_cast<std::size_t>(s) * num_actions_,
                static_cast<std::size_t>(num_actions_)};
    }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const StateActionTable& other) const {
        return num_states_ == other.num_states_ && num_actions_ == other.num_actions_;
    }

    bool operator==(const StateActionTable&) const = default;

private:
    static std::size_t checked_size(int num_states, int num_actions) {
        if (num_states <= 0 || num_actions <= 0) {
            throw Error("StateActionTable: dimensions must be positive");
        }
        return static_cast<std::size_t>(num_states) * num_actions;
    }

    std::size_t index(int s, int a) const {
        return static_cast<std::size_t>(s) * num_actions_ + a;
    }

    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> data_;
};

using RewardTable = StateActionTable;

struct StateAction {
    int state = 0;
    int action = 0;
    bool operator==(const StateAction&) const = default;
};

/// Sum of elementwise products of two equally shaped tables.
double inner_product(const StateActionTable& lhs, const StateActionTable& rhs);

/// Largest absolute elementwise difference.
double max_abs_diff(const StateActionTable& lhs, const StateActionTable& rhs);

double total(const StateActionTable& table);

bool all_finite(const StateActionTable& table);

}  // namespace ailboost
