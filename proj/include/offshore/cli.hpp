#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "difftest.hpp"
#include "emit.hpp"
#include "semantics.hpp"
#include "surface.hpp"
#include "translate.hpp"

namespace offshore {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostic = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitEnvironment = 3;

namespace detail {

struct CliError {
    int code;
    std::string message;
};

inline std::string read_source(const std::string& path, std::istream& in) {
    if (path == "-") {
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    std::ifstream file(path);
    if (!file) throw CliError{kExitEnvironment, "cannot open '" + path + "'"};
    std::ostringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

inline IExprPtr load_program(const std::string& path, std::istream& in) {
    return typecheck_icaml(parse(read_source(path, in)));
}

inline Strategy parse_strategy(const std::string& name) {
    auto s = strategy_from_name(name);
    if (!s) throw CliError{kExitDiagnostic, "unknown strategy '" + name + "'"};
    return *s;
}

inline RefPolicy parse_policy(const std::string& name) {
    if (name == "strict") return RefPolicy::Strict;
    if (name == "alloca") return RefPolicy::Alloca;
    throw CliError{kExitDiagnostic, "unknown ref policy '" + name + "' (strict|alloca)"};
}

inline std::vector<Strategy> parse_strategy_list(const std::string& list) {
    std::vector<Strategy> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_strategy(item));
    if (out.empty()) throw CliError{kExitDiagnostic, "empty strategy list"};
    return out;
}

}  // namespace detail

// Command dispatcher, factored out of main() so the whole surface is
// testable in-process. Returns the process exit code.
inline int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                       std::ostream& err) {
    CLI::App app{"translation workbench for a reference-cell calculus and its C images"};
    app.name("offshore");
    app.require_subcommand(1);

    std::string file;
    std::string strategy_name_opt = "final";
    std::string policy_name = "strict";
    std::string out_path;
    std::string strategies_list = "final";
    bool no_lift = false;
    bool keep_staraddr = false;
    bool body_only = false;
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    int depth = 8;
    double alias_bias = 0.0;

    CLI::App* check = app.add_subcommand("check", "typecheck a program and print its type");
    check->add_option("file", file, "input file, or - for stdin")->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a program and print its value");
    eval_cmd->add_option("file", file, "input file, or - for stdin")->required();

    CLI::App* translate_cmd =
        app.add_subcommand("translate", "translate and print the target-calculus tree");
    translate_cmd->add_option("--strategy", strategy_name_opt,
                              "naive|extant|ptr-array|ptr-alloca|final");
    translate_cmd->add_flag("--no-lift", no_lift, "skip declaration lifting");
    translate_cmd->add_option("--ref-policy", policy_name, "strict|alloca (final strategy)");
    translate_cmd->add_option("file", file, "input file, or - for stdin")->required();

    CLI::App* emit_cmd = app.add_subcommand("emit", "translate and print C source");
    emit_cmd->add_option("--strategy", strategy_name_opt, "naive|extant|ptr-array|ptr-alloca|final");
    emit_cmd->add_option("-o", out_path, "write the C file here instead of stdout");
    emit_cmd->add_flag("--keep-staraddr", keep_staraddr, "print *&x instead of abbreviating to x");
    emit_cmd->add_flag("--body-only", body_only, "print the bare statements, without main()");
    emit_cmd->add_option("--ref-policy", policy_name, "strict|alloca (final strategy)");
    emit_cmd->add_option("file", file, "input file, or - for stdin")->required();

    CLI::App* difftest_cmd =
        app.add_subcommand("difftest", "fuzz translations against the interpreters");
    difftest_cmd->add_option("--count", count, "number of programs");
    difftest_cmd->add_option("--seed", seed, "base seed");
    difftest_cmd->add_option("--depth", depth, "maximum program depth");
    difftest_cmd->add_option("--strategies", strategies_list, "comma-separated strategy list");
    difftest_cmd->add_option("--alias-bias", alias_bias, "probability of aliasing lets, in [0,1]");
    difftest_cmd->add_option("--ref-policy", policy_name, "strict|alloca (final strategy)");

    CLI::App* ccrun_cmd =
        app.add_subcommand("cc-run", "emit, compile with $CC, execute, compare with eval");
    ccrun_cmd->add_option("--strategy", strategy_name_opt, "naive|extant|ptr-array|ptr-alloca|final");
    ccrun_cmd->add_option("--ref-policy", policy_name, "strict|alloca (final strategy)");
    ccrun_cmd->add_flag("--keep-staraddr", keep_staraddr, "print *&x instead of abbreviating to x");
    ccrun_cmd->add_option("file", file, "input file, or - for stdin")->required();

    std::vector<const char*> argv;
    argv.push_back("offshore");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitDiagnostic;
    }

    try {
        if (check->parsed()) {
            IExprPtr program = detail::load_program(file, in);
            out << program->ty().str() << "\n";
            return kExitOk;
        }
        if (eval_cmd->parsed()) {
            IExprPtr program = detail::load_program(file, in);
            out << eval_icaml(program).value.str() << "\n";
            return kExitOk;
        }
        if (translate_cmd->parsed()) {
            IExprPtr program = alpha_rename(detail::load_program(file, in));
            Strategy strat = detail::parse_strategy(strategy_name_opt);
            CExprPtr target = translate(program, strat, detail::parse_policy(policy_name));
            if (!no_lift) target = lift_declarations(target, strategy_mode(strat));
            out << print_calculus(target) << "\n";
            return kExitOk;
        }
        if (emit_cmd->parsed()) {
            IExprPtr program = alpha_rename(detail::load_program(file, in));
            Strategy strat = detail::parse_strategy(strategy_name_opt);
            CExprPtr target = translate(program, strat, detail::parse_policy(policy_name));
            target = lift_declarations(target, strategy_mode(strat));
            CSourceUnit unit = emit_c(target, EmitOptions{!keep_staraddr});
            std::string text = body_only ? unit.body : wrap_main(unit);
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) throw detail::CliError{kExitEnvironment, "cannot write '" + out_path + "'"};
                f << text;
            } else {
                out << text;
            }
            return kExitOk;
        }
        if (difftest_cmd->parsed()) {
            DiffConfig cfg;
            cfg.count = count;
            cfg.seed = seed;
            cfg.depth = depth;
            cfg.alias_bias = alias_bias;
            cfg.strategies = detail::parse_strategy_list(strategies_list);
            cfg.policy = detail::parse_policy(policy_name);
            DiffReport report = run_difftest(cfg, &out);
            for (Strategy s : cfg.strategies) {
                const StrategyStats& st = report.per_strategy.at(s);
                out << "strategy " << strategy_name(s) << ": agree=" << st.agree
                    << " disagree=" << st.disagree << " rejected=" << st.rejected;
                if (st.type_image_mismatches > 0)
                    out << " type-image-mismatches=" << st.type_image_mismatches;
                if (!st.reject_kinds.empty()) {
                    out << " [";
                    bool first = true;
                    for (const auto& [kind, n] : st.reject_kinds) {
                        if (!first) out << " ";
                        out << kind << "=" << n;
                        first = false;
                    }
                    out << "]";
                }
                out << "\n";
            }
            if (report.naive_alias_total > 0)
                out << "naive aliasing: total=" << report.naive_alias_total
                    << " diverged=" << report.naive_alias_diverged << "\n";
            out << report.summary_line() << "\n";
            return report.disagree() == 0 ? kExitOk : kExitDivergence;
        }
        if (ccrun_cmd->parsed()) {
            IExprPtr program = detail::load_program(file, in);
            EvalResult source = eval_icaml(program);
            Strategy strat = detail::parse_strategy(strategy_name_opt);
            CExprPtr target = translate(alpha_rename(program), strat, detail::parse_policy(policy_name));
            target = lift_declarations(target, strategy_mode(strat));
            CSourceUnit unit = emit_c(target, EmitOptions{!keep_staraddr});
            std::string c_text = wrap_main(unit);
            CcResult cc = compile_and_run(c_text);
            if (cc.status == CcResult::Status::NoCompiler) {
                err << "no C compiler available (set CC)\n";
                return kExitEnvironment;
            }
            if (cc.status != CcResult::Status::Ok) {
                err << "compile or run failed:\n" << cc.detail;
                return kExitEnvironment;
            }
            std::string got = cc.output;
            while (!got.empty() && (got.back() == '\n' || got.back() == '\r')) got.pop_back();
            std::string want = c_output_format(source.value);
            out << "interpreter: " << want << "\n";
            out << "cc: " << got << "\n";
            if (got != want) {
                err << "DIVERGENCE: interpreter printed " << want << ", binary printed " << got
                    << "\n";
                return kExitDivergence;
            }
            return kExitOk;
        }
    } catch (const DiagError& e) {
        err << e.diag().format() << "\n";
        return kExitDiagnostic;
    } catch (const detail::CliError& e) {
        err << e.message << "\n";
        return e.code;
    }
    return kExitDiagnostic;
}

inline int run_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_command(args, std::cin, std::cout, std::cerr);
}

}  // namespace offshore
