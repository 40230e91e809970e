#pragma once

#include "hqe/policy.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hqe {

enum class VarKind { Polynomial, Laurent, HalfLaurent };

/// Total-degree groups. Variables in the same group share a cap on the sum
/// of their exponents (all group members are polynomial directions, so
/// discarding above the cap never corrupts in-cap coefficients).
enum class Group : int { None = 0, Y = 1, Q = 2 };

struct VarSpec {
    std::string name;
    VarKind kind = VarKind::Polynomial;
    int lo = 0;               ///< window bounds in stored units
    int hi = 0;
    int denom = 1;            ///< stored exponent e represents v^(e/denom)
    Group group = Group::None;
};

constexpr int kMaxVars = 32;
using ExpVec = std::array<int16_t, kMaxVars>;

constexpr int32_t kNoBound = std::numeric_limits<int32_t>::max() / 4;

/// Declared, ordered variable list plus the active policy. Shared immutably
/// by all series of one model.
class VarEnv {
  public:
    VarEnv(Policy pol, std::vector<VarSpec> vars) : policy_(pol), vars_(std::move(vars)) {
        if (vars_.size() > kMaxVars) throw std::invalid_argument("VarEnv: too many variables");
        for (size_t i = 0; i < vars_.size(); ++i) {
            auto& v = vars_[i];
            if (v.kind == VarKind::HalfLaurent) v.denom = 2;
            if (v.lo > v.hi) throw std::invalid_argument("VarEnv: bad window for " + v.name);
            if (!index_.emplace(v.name, (int)i).second)
                throw std::invalid_argument("VarEnv: duplicate variable " + v.name);
        }
        group_cap_[(int)Group::Y] = pol.y_cap;
        group_cap_[(int)Group::Q] = pol.q_deg_cap;
    }

    const Policy& policy() const { return policy_; }
    int nvars() const { return (int)vars_.size(); }
    const VarSpec& var(int i) const { return vars_[i]; }
    const std::vector<VarSpec>& vars() const { return vars_; }

    int index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::invalid_argument("VarEnv: unknown variable " + name);
        return it->second;
    }
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    int group_cap(Group g) const { return group_cap_[(int)g]; }

    /// In-window test for a full exponent vector (per-var windows and group caps).
    bool admissible(const ExpVec& e) const {
        int gsum[3] = {0, 0, 0};
        for (int i = 0; i < nvars(); ++i) {
            int ev = e[i];
            const VarSpec& v = vars_[i];
            if (ev < v.lo || ev > v.hi) return false;
            if (v.group != Group::None) gsum[(int)v.group] += ev;
        }
        if (gsum[1] > group_cap_[1] || gsum[2] > group_cap_[2]) return false;
        return true;
    }

    int group_degree(const ExpVec& e, Group g) const {
        int s = 0;
        for (int i = 0; i < nvars(); ++i)
            if (vars_[i].group == g) s += e[i];
        return s;
    }

  private:
    Policy policy_;
    std::vector<VarSpec> vars_;
    std::map<std::string, int> index_;
    int group_cap_[3] = {0, kNoBound, kNoBound};
};

using EnvPtr = std::shared_ptr<const VarEnv>;

inline EnvPtr make_env(Policy pol, std::vector<VarSpec> vars) {
    return std::make_shared<const VarEnv>(pol, std::move(vars));
}

} // namespace hqe
