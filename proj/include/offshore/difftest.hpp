#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "semantics.hpp"
#include "testgen.hpp"
#include "translate.hpp"

namespace offshore {

// Property harness: generate closed well-typed programs, run each through
// the source interpreter and through translate+target-interpreter, and
// compare the results.

struct DiffConfig {
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    int depth = 8;
    double alias_bias = 0.0;
    std::vector<Strategy> strategies = {Strategy::Final};
    RefPolicy policy = RefPolicy::Strict;
    bool include_nested_refs = true;
    bool include_incr = true;
    std::size_t shrink_reports = 3;  // how many divergences to shrink and log
};

struct StrategyStats {
    std::size_t agree = 0;
    std::size_t disagree = 0;
    std::size_t rejected = 0;
    std::size_t type_image_mismatches = 0;  // final only
    std::map<std::string, std::size_t> reject_kinds;
    std::vector<std::uint64_t> disagree_seeds;
};

struct DiffReport {
    std::map<Strategy, StrategyStats> per_strategy;
    std::size_t naive_alias_total = 0;     // accepted by naive, contains an aliasing let
    std::size_t naive_alias_diverged = 0;
    double elapsed_seconds = 0.0;

    std::size_t agree() const {
        std::size_t n = 0;
        for (const auto& [s, st] : per_strategy) n += st.agree;
        return n;
    }
    std::size_t disagree() const {
        std::size_t n = 0;
        for (const auto& [s, st] : per_strategy) n += st.disagree;
        return n;
    }
    std::size_t rejected() const {
        std::size_t n = 0;
        for (const auto& [s, st] : per_strategy) n += st.rejected;
        return n;
    }
    std::string summary_line() const {
        return "agree=" + std::to_string(agree()) + " disagree=" + std::to_string(disagree()) +
               " rejected=" + std::to_string(rejected());
    }
};

namespace detail {

inline IType difftest_target(std::size_t i) {
    switch (i % 4) {
        case 0:
        case 1: return IType::integer();
        case 2: return IType::unit();
        default: return IType::boolean();
    }
}

inline std::string reject_kind_of(const Diagnostic& d) {
    if (d.kind == DiagKind::RestrictionViolation) {
        auto colon = d.message.find(':');
        return "restriction:" + d.message.substr(0, colon);
    }
    return diag_kind_name(d.kind);
}

}  // namespace detail

inline GenConfig difftest_gen_config(const DiffConfig& cfg, std::size_t i) {
    GenConfig g;
    g.max_depth = cfg.depth;
    g.target_type = detail::difftest_target(i);
    g.alias_bias = cfg.alias_bias;
    g.seed = cfg.seed + i;
    g.include_nested_refs = cfg.include_nested_refs;
    g.include_incr = cfg.include_incr;
    return g;
}

inline DiffReport run_difftest(const DiffConfig& cfg, std::ostream* log = nullptr) {
    auto start = std::chrono::steady_clock::now();
    DiffReport report;
    for (Strategy s : cfg.strategies) report.per_strategy[s];

    for (std::size_t i = 0; i < cfg.count; ++i) {
        GenConfig gen_cfg = difftest_gen_config(cfg, i);
        IExprPtr program = generate(gen_cfg);
        EvalResult source = eval_icaml(program);

        for (Strategy s : cfg.strategies) {
            StrategyStats& stats = report.per_strategy[s];
            CExprPtr target;
            try {
                target = translate(program, s, cfg.policy);
            } catch (const DiagError& err) {
                ++stats.rejected;
                ++stats.reject_kinds[detail::reject_kind_of(err.diag())];
                continue;
            }
            bool alias = s == Strategy::Naive && contains_alias_let(program);
            if (alias) ++report.naive_alias_total;

            if (s == Strategy::Final && target->ty() != final_type_image(program->ty()))
                ++stats.type_image_mismatches;

            EvalResult translated = strategy_mode(s) == CMode::CoreC ? eval_corec(target)
                                                                     : eval_corece(target);
            if (translated.value == source.value) {
                ++stats.agree;
            } else {
                ++stats.disagree;
                if (alias) ++report.naive_alias_diverged;
                if (stats.disagree_seeds.size() < 64) stats.disagree_seeds.push_back(gen_cfg.seed);
                if (log && stats.disagree_seeds.size() <= cfg.shrink_reports) {
                    auto diverges = [&](const IExprPtr& e) {
                        try {
                            CExprPtr t = translate(e, s, cfg.policy);
                            EvalResult rt = strategy_mode(s) == CMode::CoreC ? eval_corec(t)
                                                                             : eval_corece(t);
                            return rt.value != eval_icaml(e).value;
                        } catch (const DiagError&) {
                            return false;
                        }
                    };
                    IExprPtr small = shrink(program, diverges);
                    *log << "divergence (" << strategy_name(s) << ", seed " << gen_cfg.seed
                         << "): " << print_surface(small) << "\n";
                }
            }
        }
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace offshore
