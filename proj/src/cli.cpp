#include "rnext/cli.hpp"

#include <cstdlib>
#include <filesystem>

#include "rnext/collar.hpp"
#include "rnext/errors.hpp"
#include "rnext/io.hpp"
#include "rnext/pipeline.hpp"
#include "rnext/surgery.hpp"

namespace rnext {

namespace {

// Writes atomically to `path`, or to `out` when no path is configured.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_atomic(path, text);
    }
}

std::string derived_profile_path(const RunConfig& c) {
    if (!c.profile_out.empty()) return c.profile_out;
    if (c.out.empty()) return {};
    std::filesystem::path p(c.out);
    p.replace_extension(".profile.csv");
    return p.string();
}

// Curvature units: R - 2 Lambda - n(n-1) q^2 / f^(2n) = 2n (Omega - f'') / f.
std::vector<double> curvature_margins(int n, const SampledProfile& p, const std::vector<double>& omega_margins) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = 2.0 * n * omega_margins[i] / p.f[i];
    return out;
}

struct PreparedCollar {
    CollarSetup setup;
    double eps;
};

PreparedCollar collar_for(const RunConfig& c) {
    const BartnikDataSpec data = data_spec(c);
    CollarSetup setup = prepare_collar(data, pipeline_config(c));
    if (c.A > 0.0) setup.spec.A = c.A;
    const double r_o = setup.spec.r_o();
    const double eps = c.eps > 0.0 ? c.eps : find_eps0(c.n, r_o, c.q, c.lambda, setup.a0);
    setup.spec.epsilon = eps;
    return {std::move(setup), eps};
}

int run_classify(const RunConfig& c, const nlohmann::json& cfg, std::ostream& out) {
    const RNParams p = model_params(c);
    const ExtremalityClass cls = classify(p, c.extremality_band);
    emit(c.out, dump_json(envelope(classify_json(p, cls), c.command, cfg)) + "\n", out);
    return kExitOk;
}

int run_rn_profile(const RunConfig& c, const nlohmann::json& cfg, std::ostream& out) {
    const RNParams p = model_params(c);
    validate(p);
    const SampledProfile u =
        c.mu > 0.0 ? rn_profile_mu(p, c.mu, c.s_max, c.profile_grid) : rn_profile(p, c.s_max, c.profile_grid);
    const std::vector<double> margins = curvature_margins(p.n, u, dec_margin_operator(p.n, p.q, p.lambda, u));
    emit(c.out, profile_csv(u, margins, cfg), out);
    return kExitOk;
}

int run_collar(const RunConfig& c, const nlohmann::json& cfg, std::ostream& out) {
    const PreparedCollar pc = collar_for(c);
    const ChargedCollar collar = build_collar(pc.setup.spec, pc.setup.fields);
    const MonotonicityReport mono = monotonicity_check(collar);
    nlohmann::json body = collar_json(collar, mono);
    body["A0"] = pc.setup.a0;
    emit(c.out, dump_json(envelope(body, c.command, cfg)) + "\n", out);
    return kExitOk;
}

int run_glue(const RunConfig& c, const nlohmann::json& cfg, std::ostream& out) {
    const PreparedCollar pc = collar_for(c);
    const ChargedCollar collar = build_collar(pc.setup.spec, pc.setup.fields);
    const TailProfile tp = tail_function(collar);
    const ProfilePiece tail{[tp](double s) { return tp(s); }, tp.s_begin(), tp.s_end(), c.q, Provenance::Analytic};
    const ProfileValue end = tp(tp.s_end());
    const double m_star = hawking_rotsym(c.n, c.q, c.lambda, end.f, end.df);
    const GluedExtension g = glue_to_rn(tail, c.n, m_star, c.mass, c.q, c.lambda, c.model_length);
    nlohmann::json body = {{"attachment", attachment_json(g.attachment)},
                           {"m_star", m_star},
                           {"collar", {{"epsilon", pc.eps}, {"A", pc.setup.spec.A}, {"case", to_string(pc.setup.spec.case_id)}}},
                           {"glue", {{"epsilon", g.glued.epsilon}, {"d", g.glued.d}, {"min_margin", g.glued.min_margin},
                                     {"shift", g.glued.shift}}},
                           {"bend", {{"delta", g.bent.delta}, {"min_bracket", g.bent.min_bracket}}},
                           {"samples", g.samples.size()},
                           {"trace", g.trace}};
    emit(c.out, dump_json(envelope(body, c.command, cfg)) + "\n", out);
    const std::string profile_path = derived_profile_path(c);
    if (!profile_path.empty())
        write_atomic(profile_path, profile_csv(g.samples, curvature_margins(c.n, g.samples, g.margins), cfg));
    return kExitOk;
}

int run_extend(const RunConfig& c, const nlohmann::json& cfg, std::ostream& out) {
    const ExtensionReport r = construct_extension(data_spec(c), c.mass, pipeline_config(c));
    emit(c.out, dump_json(envelope(report_json(r), c.command, cfg)) + "\n", out);
    const std::string profile_path = derived_profile_path(c);
    if (!profile_path.empty()) write_atomic(profile_path, profile_csv(r.profile, r.dec_margin, cfg));
    if (!c.plot_dir.empty()) emit_plotdata(r, PlotPaths::in_directory(c.plot_dir), cfg);
    return r.verified ? kExitOk : kExitVerification;
}

int run_bartnik(const RunConfig& c, const nlohmann::json& cfg, std::ostream& out) {
    const BartnikReport r = bartnik_report(data_spec(c), pipeline_config(c));
    emit(c.out, dump_json(envelope(bartnik_json(r), c.command, cfg)) + "\n", out);
    return r.admissible_nonempty ? kExitOk : kExitSurgery;
}

int run_selftest(const RunConfig& c, std::ostream& out) {
    const SuiteResult suite = selftest(acceptance_config(c));
    const std::string ledger = suite.ledger();
    out << ledger;
    if (!c.out.empty()) write_atomic(c.out, ledger);
    return suite.all_pass() ? kExitOk : kExitVerification;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
        dynamic_cast<const DomainError*>(&e) || dynamic_cast<const NotApplicableError*>(&e))
        return kExitPrecondition;
    if (dynamic_cast<const SurgeryError*>(&e)) return kExitSurgery;
    if (dynamic_cast<const VerificationError*>(&e) || dynamic_cast<const NumericalError*>(&e) ||
        dynamic_cast<const InternalError*>(&e))
        return kExitVerification;
    return kExitOther;
}

int run(const RunConfig& config, std::ostream& out) {
    validate(config);
    const nlohmann::json cfg = config_to_json(config);
    if (config.command == "classify") return run_classify(config, cfg, out);
    if (config.command == "rn-profile") return run_rn_profile(config, cfg, out);
    if (config.command == "collar") return run_collar(config, cfg, out);
    if (config.command == "glue") return run_glue(config, cfg, out);
    if (config.command == "extend") return run_extend(config, cfg, out);
    if (config.command == "bartnik") return run_bartnik(config, cfg, out);
    return run_selftest(config, out);
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        const RunConfig config = parse_config(argc, argv, [](const char* name) { return std::getenv(name); });
        return run(config, out);
    } catch (const HelpRequest& h) {
        out << h.what();
        return kExitOk;
    } catch (const std::exception& e) {
        err << "rnext: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace rnext
