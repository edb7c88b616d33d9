#pragma once

#include <string>
#include <vector>

namespace orbifusion {

// Structured verification results: one line per identity checked, with the
// window it was checked on and a witness on failure.

struct CheckResult {
    std::string name;
    std::string window;
    bool pass = false;
    std::string witness; // empty when passing

    static CheckResult ok(std::string name, std::string window) {
        return {std::move(name), std::move(window), true, {}};
    }
    static CheckResult fail(std::string name, std::string window, std::string witness) {
        return {std::move(name), std::move(window), false, std::move(witness)};
    }
};

struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<CheckResult> checks;

    void add(CheckResult c) { checks.push_back(std::move(c)); }
    void param(std::string k, std::string v) { params.emplace_back(std::move(k), std::move(v)); }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

} // namespace orbifusion
