#include "rnext/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rnext/errors.hpp"
#include "rnext/quasilocal.hpp"

namespace rnext {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Runs fn and re-throws library errors of the same type with the stage name prefixed.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    const auto tag = [&](const std::exception& e) { return std::string(name) + ": " + e.what(); };
    try {
        return fn();
    } catch (const SurgeryError& e) {
        throw SurgeryError(tag(e), e.trace());
    } catch (const PreconditionError& e) {
        throw PreconditionError(tag(e));
    } catch (const DomainError& e) {
        throw DomainError(tag(e));
    } catch (const NotApplicableError& e) {
        throw NotApplicableError(tag(e));
    } catch (const NumericalError& e) {
        throw NumericalError(tag(e));
    } catch (const VerificationError& e) {
        throw VerificationError(tag(e));
    } catch (const InternalError& e) {
        throw InternalError(tag(e));
    } catch (const UsageError& e) {
        throw UsageError(tag(e));
    } catch (const IoError& e) {
        throw IoError(tag(e));
    }
}

struct CaseChoice {
    CollarCase id;
    double kappa;
};

std::vector<CaseChoice> candidate_cases(const MetricPath& path, const CurvatureFloor& floor, int forced) {
    const auto kappa_for = [&](CollarCase c) {
        switch (c) {
            case CollarCase::Eigenvalue: return floor.kappa_eigen;
            case CollarCase::GaussNegative: return floor.kappa_gauss;
            default: return floor.kappa_scalar;
        }
    };
    if (forced != 0) {
        const CollarCase c = collar_case_from_int(forced);
        return {{c, kappa_for(c)}};
    }
    switch (path.kind()) {
        case SeedKind::Round:
            return {{CollarCase::ScalarPositive, floor.kappa_scalar}};
        case SeedKind::Declared:
            if (path.n() >= 4)
                return {{CollarCase::Pinched, floor.kappa_scalar}, {CollarCase::ScalarPositive, floor.kappa_scalar}};
            return {{CollarCase::ScalarPositive, floor.kappa_scalar}};
        case SeedKind::Axisym:
        default:
            return {{CollarCase::GaussNegative, floor.kappa_gauss},
                    {CollarCase::ScalarPositive, floor.kappa_scalar},
                    {CollarCase::Eigenvalue, floor.kappa_eigen}};
    }
}

double dec_tolerance(int n, double lambda, double f) {
    return 1e-9 * std::max(1.0, n * (n - 1.0) / (f * f) + 2.0 * std::abs(lambda));
}

}  // namespace

void validate(const BartnikDataSpec& d) {
    if (d.n < 2) throw PreconditionError("dimension must be at least 2");
    if (!(d.lambda <= 0.0) || !std::isfinite(d.lambda)) throw PreconditionError("Lambda must be non-positive");
    if (!std::isfinite(d.q)) throw PreconditionError("charge must be finite");
    if (d.H_o != 0.0) throw PreconditionError("only minimal Bartnik data (H_o = 0) are supported");
    switch (d.seed) {
        case SeedKind::Round:
            if (!(d.r_o > 0.0)) throw PreconditionError("round seed needs r_o > 0");
            break;
        case SeedKind::Declared:
            if (!(d.r_o > 0.0)) throw PreconditionError("declared seed needs r_o > 0");
            break;
        case SeedKind::Axisym:
            if (d.n != 2) throw PreconditionError("axisymmetric seeds are two-dimensional");
            if (!d.axisym) throw PreconditionError("axisymmetric seed data missing");
            break;
    }
}

double boundary_radius(const BartnikDataSpec& d) {
    return d.seed == SeedKind::Axisym && d.axisym ? d.axisym->volume_radius() : d.r_o;
}

MetricPath build_path(const BartnikDataSpec& d, const PipelineConfig& c) {
    validate(d);
    PathOptions opt;
    opt.theta_switch = c.theta_switch;
    opt.t_grid = c.t_grid;
    opt.theta_grid = c.theta_grid;
    switch (d.seed) {
        case SeedKind::Round: return MetricPath::round(d.n, d.r_o, opt);
        case SeedKind::Declared: return MetricPath::declared(d.n, d.r_o, d.declared_floor, opt);
        case SeedKind::Axisym:
        default: return normalize_path(*d.axisym, opt);
    }
}

CollarSetup prepare_collar(const BartnikDataSpec& data, const PipelineConfig& config) {
    const MetricPath path = stage("path", [&] { return build_path(data, config); });
    const CurvatureFloor floor = stage("curvature", [&] {
        return curvature_floor_along_path(path, config.curvature_margin);
    });
    CollarSpec spec{path};
    spec.q = data.q;
    spec.lambda = data.lambda;
    spec.epsilon = 1.0;
    spec.A = 1.0;
    std::optional<PathFields> fields;
    std::string reasons;
    for (const CaseChoice& c : candidate_cases(path, floor, config.collar_case)) {
        spec.case_id = c.id;
        spec.kappa = c.kappa;
        try {
            PathFields f = sample_path(path, lapse_for(c.id) == LapseKind::Eigenfunction);
            validate_collar_spec(spec, f);
            fields = std::move(f);
            break;
        } catch (const PreconditionError& e) {
            reasons += std::string(reasons.empty() ? "" : "; ") + to_string(c.id) + ": " + e.what();
        }
    }
    if (!fields) throw PreconditionError("collar: no admissible case (" + reasons + ")");
    const A0Result a0 = stage("collar", [&] { return find_A0(spec, *fields); });
    spec.A = a0.a0;
    return CollarSetup{std::move(spec), std::move(*fields), a0.a0};
}

ExtensionReport construct_extension(const BartnikDataSpec& data, double m, const PipelineConfig& config) {
    ExtensionReport rep;
    rep.data = data;
    rep.config = config;
    rep.m_requested = m;
    rep.q = data.q;
    const int n = data.n;
    const double q = data.q, lambda = data.lambda;

    stage("data", [&] { validate(data); });
    rep.m_o = m_o(n, boundary_radius(data), q, lambda);
    if (!(m > rep.m_o))
        throw PreconditionError("data: requested mass " + fmt(m) + " must exceed m_o = " + fmt(rep.m_o));
    rep.bartnik_bound = rep.m_o;

    CollarSetup setup = prepare_collar(data, config);
    CollarSpec& spec = setup.spec;
    const PathFields& fields = setup.fields;
    const double r_o = spec.r_o();
    rep.collar_case = spec.case_id;
    rep.kappa = spec.kappa;
    rep.a0 = setup.a0;
    rep.diagnostics.push_back("collar case " + to_string(spec.case_id) + " with kappa = " + fmt(spec.kappa));

    // Largest ladder eps whose far-end mass stays below the target.
    const double target = rep.m_o + config.mass_fraction * (m - rep.m_o);
    double eps = 0.0;
    for (int k = 0; k <= 20; ++k) {
        const double e = std::ldexp(1.0, -k);
        const double mf = collar_far_mass(n, r_o, q, lambda, e, spec.A);
        if (mf > rep.m_o && mf <= target) {
            eps = e;
            break;
        }
    }
    if (!(eps > 0.0)) throw PreconditionError("collar: no eps in the ladder places the collar mass below m");
    spec.epsilon = eps;
    rep.epsilon = eps;
    rep.A = spec.A;

    const ChargedCollar collar = stage("collar", [&] { return build_collar(spec, fields); });
    const TailProfile tp = stage("tail", [&] { return tail_function(collar); });
    const ImcfReparam imcf = stage("tail", [&] { return imcf_reparametrization(collar); });
    rep.diagnostics.push_back("collar IMCF speed error " + fmt(imcf.max_speed_error));
    ProfilePiece tail{[tp](double s) { return tp(s); }, tp.s_begin(), tp.s_end(), q, Provenance::Analytic};
    const ProfileValue vb = tp(tp.s_end());
    rep.m_star = hawking_rotsym(n, q, lambda, vb.f, vb.df);

    const GluedExtension glued = stage("surgery", [&] {
        return glue_to_rn(tail, n, rep.m_star, m, q, lambda, config.model_length);
    });
    rep.attachment = glued.attachment;
    rep.m_achieved = glued.attachment.m_e;
    rep.diagnostics.push_back("gluing eps = " + fmt(glued.glued.epsilon) + ", d = " + fmt(glued.glued.d) +
                              ", bending delta = " + fmt(glued.bent.delta));

    // Collar slices before the tail: t = s / A on the path grid.
    const Warp w{eps};
    for (std::size_t i = 0; i < collar.fields.nt; ++i) {
        const double t = collar.fields.t[i];
        const double s = spec.A * t;
        if (!(s < tail.a)) break;
        double margin = kInf, H = kInf;
        for (std::size_t j = 0; j < collar.fields.nx; ++j) {
            margin = std::min(margin, collar.fields.at(collar.dec_margin, i, j));
            H = std::min(H, collar.fields.at(collar.mean_curvature, i, j));
        }
        rep.profile.push_back(s, r_o * w.F(t), r_o * w.dF(t) / spec.A, r_o * w.d2F(t) / (spec.A * spec.A),
                              Provenance::Analytic);
        rep.dec_margin.push_back(margin);
        rep.mean_curvature.push_back(H);
        rep.hawking.push_back(collar.hawking.mass[i]);
    }
    rep.collar_samples = rep.profile.size();
    for (std::size_t i = 0; i < glued.samples.size(); ++i) {
        const double f = glued.samples.f[i], df = glued.samples.df[i];
        rep.profile.push_back(glued.samples.s[i], f, df, glued.samples.d2f[i], glued.samples.provenance[i]);
        rep.dec_margin.push_back(2.0 * n * glued.margins[i] / f);
        rep.mean_curvature.push_back(n * df / f);
        rep.hawking.push_back(hawking_rotsym(n, q, lambda, f, df));
    }
    rep.m_far = rep.hawking.back();

    // Verification.
    bool dec_ok = collar.margin.min_margin > 0.0;
    double min_margin = collar.margin.min_margin, worst_s = 0.0;
    for (std::size_t i = 0; i < rep.profile.size(); ++i) {
        const double v = rep.dec_margin[i];
        if (rep.profile.provenance[i] == Provenance::Ode) {
            if (v < -dec_tolerance(n, lambda, rep.profile.f[i])) dec_ok = false;
            continue;
        }
        if (i > 0 && !(v > 0.0)) dec_ok = false;
        if (i > 0 && v < min_margin) {
            min_margin = v;
            worst_s = rep.profile.s[i];
        }
    }
    rep.min_dec_margin = min_margin;
    rep.checks.push_back({"dec_margin", dec_ok,
                          "min margin " + fmt(min_margin) + " at s = " + fmt(worst_s) + " off the exact model region"});

    const OutwardMinimizingVerdict om = verify_outward_minimizing(rep);
    rep.boundary_mean_curvature = om.boundary_H;
    rep.min_mean_curvature = om.min_H;
    rep.checks.push_back({"outward_minimizing", om.pass, om.detail});

    const bool mass_ok = rep.m_achieved == m && std::abs(rep.m_far - m) <= 1e-8 * std::max(1.0, std::abs(m));
    rep.checks.push_back({"achieved_mass", mass_ok,
                          "attachment " + fmt(rep.m_achieved) + ", far Hawking mass " + fmt(rep.m_far)});

    rep.verdict = classify(RNParams{n, m, q, lambda}).kind;
    rep.checks.push_back({"sub_extremal", rep.verdict == Extremality::SubExtremal, to_string(rep.verdict)});

    rep.penrose_slack = m - rep.m_o;
    const double slack_from_far = rep.m_far - rep.m_o;
    rep.checks.push_back({"penrose_slack", rep.penrose_slack > 0.0 && std::abs(slack_from_far - rep.penrose_slack) <= 1e-8,
                          "m - m_o = " + fmt(rep.penrose_slack)});

    const double q_boundary = quasi_local_charge_rotsym(q);
    rep.checks.push_back({"charge", q_boundary == glued.attachment.q_e, "boundary " + fmt(q_boundary) + ", tail " +
                                                                            fmt(glued.attachment.q_e)});

    rep.verified = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
    return rep;
}

OutwardMinimizingVerdict verify_outward_minimizing(const ExtensionReport& r) {
    OutwardMinimizingVerdict v;
    if (r.mean_curvature.empty()) {
        v.detail = "empty foliation";
        return v;
    }
    v.boundary_H = r.mean_curvature.front();
    v.min_H = kInf;
    for (std::size_t i = 1; i < r.mean_curvature.size(); ++i)
        if (r.mean_curvature[i] < v.min_H) {
            v.min_H = r.mean_curvature[i];
            v.worst_s = r.profile.s[i];
        }
    v.pass = std::abs(v.boundary_H) <= 1e-12 && v.min_H > 0.0;
    v.detail = "H(boundary) = " + fmt(v.boundary_H) + ", min H = " + fmt(v.min_H) + " at s = " + fmt(v.worst_s);
    return v;
}

OutwardMinimizingVerdict verify_outward_minimizing(const SampledProfile& p, double boundary_tol) {
    OutwardMinimizingVerdict v;
    if (p.size() < 2) {
        v.detail = "profile needs at least two samples";
        return v;
    }
    // n only scales H, so its sign pattern is that of f' / f.
    v.boundary_H = p.df.front() / p.f.front();
    v.min_H = kInf;
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double H = p.df[i] / p.f[i];
        if (H < v.min_H) {
            v.min_H = H;
            v.worst_s = p.s[i];
        }
    }
    v.pass = std::abs(v.boundary_H) <= boundary_tol && v.min_H > 0.0;
    v.detail = "f'/f at boundary = " + fmt(v.boundary_H) + ", min f'/f = " + fmt(v.min_H) + " at s = " + fmt(v.worst_s);
    return v;
}

BartnikReport bartnik_report(const BartnikDataSpec& data, const PipelineConfig& config) {
    validate(data);
    BartnikReport rep;
    rep.data = data;
    const int n = data.n;
    const double r_o = boundary_radius(data);
    rep.m_o = m_o(n, r_o, data.q, data.lambda);
    rep.h_r_o = eval_h(RNParams{n, 0.0, data.q, data.lambda}, r_o);
    const ExtremalityClass cls = classify(RNParams{n, rep.m_o, data.q, data.lambda});
    rep.m_o_class = cls.kind;
    rep.r_plus = cls.r_plus.value_or(0.0);
    rep.bound = rep.m_o;
    rep.witnessed_gap = kInf;
    for (int k = 1; k <= config.bartnik_k_max; ++k) {
        BartnikWitness w;
        w.k = k;
        w.m = (1.0 + std::ldexp(1.0, -k)) * rep.m_o;
        try {
            const ExtensionReport e = construct_extension(data, w.m, config);
            w.success = e.verified;
            w.slack = e.penrose_slack;
            w.detail = e.verified ? "verified" : "verification failed";
        } catch (const Error& e) {
            w.detail = e.what();
        }
        if (w.success) {
            rep.admissible_nonempty = true;
            rep.witnessed_gap = std::min(rep.witnessed_gap, w.m - rep.m_o);
        }
        rep.witnesses.push_back(w);
    }
    if (rep.admissible_nonempty) {
        rep.statement = "admissible class nonempty; Bartnik mass <= " + fmt(rep.bound) +
                        ", witnessed within " + fmt(rep.witnessed_gap);
    } else {
        rep.witnessed_gap = 0.0;
        rep.statement = "no witness construction succeeded; nonemptiness not established";
    }
    return rep;
}

}  // namespace rnext
