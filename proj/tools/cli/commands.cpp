#include "cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"

#include <gptcloak/cloaking.hpp>
#include <gptcloak/errors.hpp>
#include <gptcloak/gpt.hpp>

#include "cli/csv.hpp"
#include "cli/structure_file.hpp"

namespace gptcloak::cli {

ConfigError::ConfigError(const std::string& field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(field) {}

namespace {

double parse_number(const std::string& field, std::string_view text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty() || !std::isfinite(v)) {
        throw ConfigError(field, fmt::format("'{}' is not a finite number", text));
    }
    return v;
}

void require_path(const std::string& field, const std::filesystem::path& path) {
    if (path.empty()) throw ConfigError(field, "a path is required");
}

void require_at_least(const std::string& field, int value, int lowest) {
    if (value < lowest) throw ConfigError(field, fmt::format("must be at least {} (got {})", lowest, value));
}

void require_positive(const std::string& field, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(field, fmt::format("must be positive (got {})", value));
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        fmt::print(err, "error: invalid configuration: {}\n", e.what());
        return kExitConfig;
    } catch (const FileError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFile;
    } catch (const DegenerateFitError& e) {
        fmt::print(err, "error: degenerate fit: {}\n", e.what());
        return kExitDegenerateFit;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
}

std::string core_label(const CoreConstraint& core) {
    switch (core.kind()) {
        case CoreKind::Free: return "free";
        case CoreKind::Insulated: return "insulated";
        case CoreKind::Fixed: return fmt::format("fixed={:.17g}", core.value());
    }
    return {};
}

}  // namespace

CoreConstraint parse_core(const std::string& text) {
    if (text == "free") return CoreConstraint::free();
    if (text == "insulated") return CoreConstraint::insulated();
    constexpr std::string_view prefix = "fixed=";
    if (text.starts_with(prefix)) {
        const double v = parse_number("--core", std::string_view(text).substr(prefix.size()));
        if (v < 0.0) throw ConfigError("--core", "fixed core conductivity must be non-negative");
        return CoreConstraint::fixed(v);
    }
    throw ConfigError("--core", fmt::format("expected free, fixed=<value> or insulated (got '{}')", text));
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::string_view rest = text;
    while (true) {
        const std::size_t comma = rest.find(',');
        out.push_back(parse_number(field, rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::filesystem::path report_path(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    p += ".report.json";
    return p;
}

int cmd_design(const DesignConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_at_least("--order", config.order, 1);
        require_path("--out", config.out);
        const CoreConstraint core = parse_core(config.core);
        if (config.solver.max_iterations < 1) throw ConfigError("--max-iterations", "must be at least 1");
        require_positive("--tolerance", config.solver.residual_tolerance);

        DesignProblem problem;
        if (config.radii) {
            if (config.radii->size() != static_cast<std::size_t>(config.order) + 1) {
                throw ConfigError("--radii", fmt::format("expected {} radii for order {} (got {})", config.order + 1,
                                                         config.order, config.radii->size()));
            }
            problem = DesignProblem{config.order, *config.radii, core, 1.0};
            try {
                problem.validate();
            } catch (const Error& e) {
                throw ConfigError("--radii", e.what());
            }
        } else {
            problem = DesignProblem::with_default_radii(config.order, core);
        }

        const DesignReport report = solve_design(problem, config.solver);
        const auto sigma = report.structure.conductivities();

        // extremes over the layers the solver was free to choose
        const std::size_t designed = problem.unknown_count();
        const auto [lo, hi] = std::minmax_element(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(designed));

        StructureFile file{report.structure,
                           StructureMetadata{.order = config.order,
                                             .core = core_label(core),
                                             .converged = report.converged,
                                             .iterations = report.iterations,
                                             .generator = "gptcloak design"}};
        write_structure_file(config.out, file);

        nlohmann::json doc;
        doc["order"] = config.order;
        doc["core"] = core_label(core);
        doc["radii"] = std::vector<double>(report.structure.radii().begin(), report.structure.radii().end());
        doc["conductivities"] = std::vector<double>(sigma.begin(), sigma.end());
        doc["converged"] = report.converged;
        doc["status"] = report.status;
        doc["iterations"] = report.iterations;
        doc["residual_history"] = report.residual_history;
        doc["final_gpts"] = report.final_residuals;
        doc["min_jacobian_rank"] = report.min_jacobian_rank;
        doc["rank_deficient"] = report.rank_deficient;
        doc["core_conductivity"] = report.structure.core_conductivity();
        doc["max_conductivity"] = *hi;
        doc["min_conductivity"] = *lo;
        write_file_atomic(report_path(config.out), doc.dump(2) + "\n");

        fmt::print(out, "converged={}\n", report.converged);
        fmt::print(out, "iterations={}\n", report.iterations);
        fmt::print(out, "residual={:.6e}\n", report.residual_history.back());
        fmt::print(out, "core_conductivity={:.17g}\n", report.structure.core_conductivity());
        fmt::print(out, "max_conductivity={:.17g}\n", *hi);
        fmt::print(out, "min_conductivity={:.17g}\n", *lo);

        if (!report.converged) {
            fmt::print(err, "error: design did not converge: {}\n", report.status);
            return static_cast<int>(kExitFailure);
        }
        return static_cast<int>(kExitOk);
    });
}

int cmd_gpt(const GptConfig& config, std::ostream&, std::ostream& err) {
    return guarded(err, [&] {
        require_path("--structure", config.structure);
        require_at_least("--kmax", config.k_max, 1);
        require_path("--out", config.out);

        const StructureFile file = read_structure_file(config.structure);
        const GptSpectrum spectrum = gpt_spectrum(file.structure, config.k_max);

        CsvTable table({"k", "M_k"});
        for (int k = 1; k <= config.k_max; ++k) table.add_row({std::to_string(k), csv_number(spectrum.at_mode(k))});
        write_file_atomic(config.out, table.text());
        return static_cast<int>(kExitOk);
    });
}

int cmd_dtn(const DtnConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_path("--structure", config.structure);
        require_positive("--rho", config.rho);
        require_positive("--s", config.s);
        require_at_least("--kmax", config.k_max, 1);
        require_path("--out", config.out);

        const StructureFile file = read_structure_file(config.structure);
        const DtnPerturbationReport report = operator_norm_estimate(file.structure, config.rho, config.s, config.k_max);

        CsvTable table({"k", "delta_k"});
        for (int k = 1; k <= config.k_max; ++k) {
            table.add_row({std::to_string(k), csv_number(report.deltas[static_cast<std::size_t>(k)])});
        }
        table.add_row({"sup_norm", csv_number(report.sup_norm)});
        table.add_row({"tail_bound", csv_number(report.tail_bound)});
        write_file_atomic(config.out, table.text());

        fmt::print(out, "sup_norm={:.17g}\n", report.sup_norm);
        fmt::print(out, "sup_mode={}\n", report.sup_mode);
        return static_cast<int>(kExitOk);
    });
}

int cmd_decay(const DecayConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_path("--structure", config.structure);
        if (config.rho_list.size() < 2) throw ConfigError("--rho-list", "at least two values are required");
        for (double rho : config.rho_list) require_positive("--rho-list", rho);
        require_positive("--s", config.s);
        require_at_least("--kmax", config.k_max, 1);
        require_path("--out", config.out);

        const StructureFile file = read_structure_file(config.structure);
        const DecayFit fit = decay_rate(file.structure, config.s, config.rho_list, config.k_max);

        CsvTable table({"rho", "sup_norm"});
        for (std::size_t i = 0; i < fit.rhos.size(); ++i) {
            table.add_row({csv_number(fit.rhos[i]), csv_number(fit.sup_norms[i])});
        }
        write_file_atomic(config.out, table.text());

        fmt::print(out, "slope={:.17g}\n", fit.slope);
        fmt::print(out, "log_constant={:.17g}\n", fit.log_constant);
        return static_cast<int>(kExitOk);
    });
}

int cmd_field(const FieldConfig& config, std::ostream&, std::ostream& err) {
    return guarded(err, [&] {
        require_path("--structure", config.structure);
        require_at_least("--mode", config.mode, 1);
        require_positive("--rho", config.rho);
        require_at_least("--grid", config.grid, 2);
        require_path("--out", config.out);

        const StructureFile file = read_structure_file(config.structure);
        const RadialLayeredStructure structure =
            config.rho == 1.0 ? file.structure : file.structure.scaled(config.rho);
        const double half_width = std::max(2.0, structure.outer_radius());
        const int n = config.grid;

        CsvTable table({"x", "y", "u"});
        for (int iy = 0; iy < n; ++iy) {
            const double y = -half_width + 2.0 * half_width * iy / (n - 1);
            for (int ix = 0; ix < n; ++ix) {
                const double x = -half_width + 2.0 * half_width * ix / (n - 1);
                const auto u = field_value(structure, config.mode, PolarPoint{std::hypot(x, y), std::atan2(y, x)});
                table.add_row({csv_number(x), csv_number(y), csv_number(u)});
            }
        }
        write_file_atomic(config.out, table.text());
        return static_cast<int>(kExitOk);
    });
}

int cmd_pushforward(const PushforwardConfig& config, std::ostream&, std::ostream& err) {
    return guarded(err, [&] {
        require_path("--structure", config.structure);
        if (!(config.rho > 0.0 && config.rho < 1.5)) {
            throw ConfigError("--rho", fmt::format("must lie in (0, 1.5) (got {})", config.rho));
        }
        require_at_least("--grid", config.grid, 2);
        require_path("--out", config.out);

        const StructureFile file = read_structure_file(config.structure);
        const int n = config.grid;

        CsvTable table({"x", "y", "a11", "a12", "a22"});
        for (int iy = 0; iy < n; ++iy) {
            const double y = -2.0 + 4.0 * iy / (n - 1);
            for (int ix = 0; ix < n; ++ix) {
                const double x = -2.0 + 4.0 * ix / (n - 1);
                const Point2 p{x, y};
                if (p.norm() > 2.0) continue;
                const auto a = pushforward_tensor(file.structure, config.rho, p);
                if (a) {
                    table.add_row({csv_number(x), csv_number(y), csv_number(a->a11), csv_number(a->a12),
                                   csv_number(a->a22)});
                } else {
                    table.add_row({csv_number(x), csv_number(y), "", "", ""});
                }
            }
        }
        write_file_atomic(config.out, table.text());
        return static_cast<int>(kExitOk);
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Layered disk conductivities with vanishing contracted GPTs, and their near-cloaking behaviour",
                 "gptcloak"};
    app.require_subcommand(1);

    DesignConfig design;
    std::string design_radii, design_out;
    auto* design_cmd = app.add_subcommand("design", "Solve for layer conductivities with M_1..M_N = 0");
    design_cmd->add_option("--order", design.order, "Vanishing order N")->required();
    design_cmd->add_option("--core", design.core, "free | fixed=<v> | insulated")->required();
    design_cmd->add_option("--radii", design_radii, "Comma-separated r_1 > ... > r_{N+1}");
    design_cmd->add_option("--out", design_out, "Structure file to write")->required();
    design_cmd->add_option("--tolerance", design.solver.residual_tolerance, "Scaled residual tolerance");
    design_cmd->add_option("--max-iterations", design.solver.max_iterations, "Iteration cap");

    GptConfig gpt_cfg;
    std::string gpt_structure, gpt_out;
    auto* gpt_cmd = app.add_subcommand("gpt", "Contracted GPTs M_1..M_K");
    gpt_cmd->add_option("--structure", gpt_structure)->required();
    gpt_cmd->add_option("--kmax", gpt_cfg.k_max)->capture_default_str();
    gpt_cmd->add_option("--out", gpt_out)->required();

    DtnConfig dtn;
    std::string dtn_structure, dtn_out;
    auto* dtn_cmd = app.add_subcommand("dtn", "DtN eigenvalue perturbations of the structure shrunk by rho");
    dtn_cmd->add_option("--structure", dtn_structure)->required();
    dtn_cmd->add_option("--rho", dtn.rho)->required();
    dtn_cmd->add_option("--s", dtn.s)->capture_default_str();
    dtn_cmd->add_option("--kmax", dtn.k_max)->capture_default_str();
    dtn_cmd->add_option("--out", dtn_out)->required();

    DecayConfig decay;
    std::string decay_structure, decay_rhos, decay_out;
    auto* decay_cmd = app.add_subcommand("decay", "Log-log slope of the DtN perturbation against rho");
    decay_cmd->add_option("--structure", decay_structure)->required();
    decay_cmd->add_option("--rho-list", decay_rhos, "Comma-separated rho values (default 0.1,0.05,0.025)");
    decay_cmd->add_option("--s", decay.s)->capture_default_str();
    decay_cmd->add_option("--kmax", decay.k_max)->capture_default_str();
    decay_cmd->add_option("--out", decay_out)->required();

    FieldConfig field;
    std::string field_structure, field_out;
    auto* field_cmd = app.add_subcommand("field", "Sample the solution for the harmonic r^k cos(k theta)");
    field_cmd->add_option("--structure", field_structure)->required();
    field_cmd->add_option("--mode", field.mode)->required();
    field_cmd->add_option("--rho", field.rho, "Scale applied to the structure")->capture_default_str();
    field_cmd->add_option("--grid", field.grid)->capture_default_str();
    field_cmd->add_option("--out", field_out)->required();

    PushforwardConfig push;
    std::string push_structure, push_out;
    auto* push_cmd = app.add_subcommand("pushforward", "Sample the blown-up anisotropic conductivity over B_2");
    push_cmd->add_option("--structure", push_structure)->required();
    push_cmd->add_option("--rho", push.rho)->required();
    push_cmd->add_option("--grid", push.grid)->capture_default_str();
    push_cmd->add_option("--out", push_out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    return guarded(err, [&] {
        if (*design_cmd) {
            if (!design_radii.empty()) design.radii = parse_list("--radii", design_radii);
            design.out = design_out;
            return cmd_design(design, out, err);
        }
        if (*gpt_cmd) {
            gpt_cfg.structure = gpt_structure;
            gpt_cfg.out = gpt_out;
            return cmd_gpt(gpt_cfg, out, err);
        }
        if (*dtn_cmd) {
            dtn.structure = dtn_structure;
            dtn.out = dtn_out;
            return cmd_dtn(dtn, out, err);
        }
        if (*decay_cmd) {
            if (!decay_rhos.empty()) decay.rho_list = parse_list("--rho-list", decay_rhos);
            decay.structure = decay_structure;
            decay.out = decay_out;
            return cmd_decay(decay, out, err);
        }
        if (*field_cmd) {
            field.structure = field_structure;
            field.out = field_out;
            return cmd_field(field, out, err);
        }
        push.structure = push_structure;
        push.out = push_out;
        return cmd_pushforward(push, out, err);
    });
}

}  // namespace gptcloak::cli
