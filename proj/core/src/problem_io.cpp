#include "paretopt/problem_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace paretopt {

using njson = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_fail(const std::string& origin, const std::string& msg) {
    throw SchemaError(origin + ": " + msg);
}

double number_at(const njson& j, const std::string& origin, const std::string& field) {
    if (!j.is_number()) schema_fail(origin, field + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema_fail(origin, field + " must be finite");
    return v;
}

Polynomial parse_polynomial(const njson& arr, int n, const std::string& origin,
                            const std::string& field) {
    if (!arr.is_array()) schema_fail(origin, field + " must be an array of terms");
    Polynomial p(n);
    int idx = 0;
    for (const njson& term : arr) {
        const std::string where = field + "[" + std::to_string(idx++) + "]";
        if (!term.is_object()) schema_fail(origin, where + " must be an object");
        if (!term.contains("exponents") || !term.contains("coeff"))
            schema_fail(origin, where + " needs \"exponents\" and \"coeff\"");
        const njson& exps = term["exponents"];
        if (!exps.is_array() || static_cast<int>(exps.size()) != n)
            schema_fail(origin, where + ".exponents must be an array of length n");
        std::vector<int> e;
        e.reserve(static_cast<std::size_t>(n));
        for (const njson& v : exps) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                schema_fail(origin, where + ".exponents entries must be non-negative integers");
            e.push_back(v.get<int>());
        }
        p.add_term(Exponent(std::move(e)), number_at(term["coeff"], origin, where + ".coeff"));
    }
    return p;
}

njson polynomial_to_json(const Polynomial& p) {
    njson arr = njson::array();
    for (const auto& [e, c] : p.terms()) {
        njson term;
        term["exponents"] = e.entries();
        term["coeff"] = c;
        arr.push_back(std::move(term));
    }
    return arr;
}

njson vector_to_json(const Eigen::VectorXd& v) {
    njson arr = njson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd json_to_vector(const njson& arr, int expected, const std::string& origin,
                               const std::string& field) {
    if (!arr.is_array() || (expected >= 0 && static_cast<int>(arr.size()) != expected))
        schema_fail(origin, field + " must be an array of length " + std::to_string(expected));
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const njson& e : arr) v(i++) = number_at(e, origin, field);
    return v;
}

njson gram_to_json(const GramBlock& g, int n) {
    njson out;
    out["order"] = g.order;
    njson basis_arr = njson::array();
    if (!g.empty()) {
        MonomialBasis b(n, g.order);
        for (int i = 0; i < b.size(); ++i) basis_arr.push_back(b[i].entries());
    }
    out["basis"] = std::move(basis_arr);
    njson gram = njson::array();
    for (Eigen::Index i = 0; i < g.gram.rows(); ++i)
        for (Eigen::Index j = 0; j < g.gram.cols(); ++j) gram.push_back(g.gram(i, j));
    out["gram_row_major"] = std::move(gram);
    return out;
}

std::string utc_timestamp() {
    std::time_t t;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

njson point_to_json(const EfficientPoint& pt) {
    njson j;
    j["x"] = vector_to_json(pt.x);
    j["values"] = vector_to_json(pt.values);
    j["z"] = vector_to_json(pt.z);
    j["k_used"] = pt.k_used;
    j["family"] = to_string(pt.family);
    j["verified"] = pt.verified;
    j["reverify_ok"] = pt.reverify_ok;
    j["objective"] = pt.objective;
    j["gap"] = pt.gap;
    j["solve_status"] = to_string(pt.solve_status);
    njson ranks = njson::array();
    for (const auto& [t, r] : pt.ranks) ranks.push_back(njson::array({t, r}));
    j["ranks"] = std::move(ranks);
    if (pt.certificate)
        j["certificate"] = njson::parse(certificate_to_json(*pt.certificate));
    else
        j["certificate"] = nullptr;
    return j;
}

}  // namespace

ProblemFile parse_problem_text(const std::string& json_text, const std::string& origin) {
    njson doc;
    try {
        doc = njson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        schema_fail(origin, std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_fail(origin, "top level must be an object");

    ProblemFile pf;
    if (!doc.contains("n") || !doc["n"].is_number_integer())
        schema_fail(origin, "\"n\" (variable count) must be an integer");
    pf.problem.n = doc["n"].get<int>();
    if (pf.problem.n < 1) schema_fail(origin, "\"n\" must be at least 1");

    if (doc.contains("variables")) {
        const njson& vars = doc["variables"];
        if (!vars.is_array() || static_cast<int>(vars.size()) != pf.problem.n)
            schema_fail(origin, "\"variables\" must list exactly n names");
        for (const njson& v : vars) {
            if (!v.is_string()) schema_fail(origin, "\"variables\" entries must be strings");
            pf.variable_names.push_back(v.get<std::string>());
        }
    } else {
        for (int i = 0; i < pf.problem.n; ++i)
            pf.variable_names.push_back("x" + std::to_string(i + 1));
    }

    if (!doc.contains("objectives") || !doc["objectives"].is_array() || doc["objectives"].empty())
        schema_fail(origin, "\"objectives\" must be a non-empty array");
    int j = 0;
    for (const njson& obj : doc["objectives"])
        pf.problem.objectives.push_back(parse_polynomial(
            obj, pf.problem.n, origin, "objectives[" + std::to_string(j++) + "]"));

    if (doc.contains("constraints")) {
        if (!doc["constraints"].is_array())
            schema_fail(origin, "\"constraints\" must be an array");
        int i = 0;
        for (const njson& g : doc["constraints"])
            pf.problem.constraints.push_back(parse_polynomial(
                g, pf.problem.n, origin, "constraints[" + std::to_string(i++) + "]"));
    }

    const int p = pf.problem.objective_count();
    if (doc.contains("lambda")) {
        pf.problem.lambda = json_to_vector(doc["lambda"], p, origin, "lambda");
        for (Eigen::Index i = 0; i < pf.problem.lambda.size(); ++i)
            if (!(pf.problem.lambda(i) > 0.0))
                schema_fail(origin, "lambda must be strictly positive");
    } else {
        pf.problem.lambda = Eigen::VectorXd::Ones(p);
    }

    if (doc.contains("sweep")) {
        const njson& sw = doc["sweep"];
        if (!sw.is_object()) schema_fail(origin, "\"sweep\" must be an object");
        if (sw.contains("z_list")) {
            if (!sw["z_list"].is_array()) schema_fail(origin, "sweep.z_list must be an array");
            for (const njson& z : sw["z_list"])
                pf.sweep.z_list.push_back(json_to_vector(z, pf.problem.n, origin, "sweep.z_list"));
        }
        if (sw.contains("box")) {
            const njson& box = sw["box"];
            if (!box.is_array() || static_cast<int>(box.size()) != pf.problem.n)
                schema_fail(origin, "sweep.box must list [lo, hi] per variable");
            SweepBox sb;
            sb.lo.resize(pf.problem.n);
            sb.hi.resize(pf.problem.n);
            int i = 0;
            for (const njson& pair : box) {
                if (!pair.is_array() || pair.size() != 2)
                    schema_fail(origin, "sweep.box entries must be [lo, hi] pairs");
                sb.lo(i) = number_at(pair[0], origin, "sweep.box.lo");
                sb.hi(i) = number_at(pair[1], origin, "sweep.box.hi");
                if (sb.lo(i) > sb.hi(i))
                    schema_fail(origin, "sweep.box bounds must satisfy lo <= hi");
                ++i;
            }
            pf.sweep.box = std::move(sb);
        }
        if (sw.contains("samples")) {
            if (!sw["samples"].is_number_integer() || sw["samples"].get<long long>() < 0)
                schema_fail(origin, "sweep.samples must be a non-negative integer");
            pf.sweep.samples = sw["samples"].get<int>();
        }
        if (sw.contains("seed")) {
            if (!sw["seed"].is_number_integer())
                schema_fail(origin, "sweep.seed must be an integer");
            pf.sweep.seed = sw["seed"].get<std::uint64_t>();
        }
    }

    if (doc.contains("options")) {
        const njson& op = doc["options"];
        if (!op.is_object()) schema_fail(origin, "\"options\" must be an object");
        if (op.contains("family")) {
            const std::string fam = op["family"].get<std::string>();
            if (fam == "Q") pf.sweep.family = RelaxFamily::Q;
            else if (fam == "P") pf.sweep.family = RelaxFamily::P;
            else schema_fail(origin, "options.family must be \"Q\" or \"P\"");
        }
        if (op.contains("k_max")) {
            if (!op["k_max"].is_number_integer())
                schema_fail(origin, "options.k_max must be an integer");
            pf.sweep.k_max = op["k_max"].get<int>();
        }
        if (op.contains("tolerances")) {
            const njson& tl = op["tolerances"];
            if (!tl.is_object()) schema_fail(origin, "options.tolerances must be an object");
            if (tl.contains("gap")) pf.sweep.tol_gap = number_at(tl["gap"], origin, "tolerances.gap");
            if (tl.contains("feas")) pf.sweep.tol_feas = number_at(tl["feas"], origin, "tolerances.feas");
            if (tl.contains("rank")) pf.sweep.tol_rank = number_at(tl["rank"], origin, "tolerances.rank");
            if (tl.contains("point_feas"))
                pf.sweep.point_feas_tol = number_at(tl["point_feas"], origin, "tolerances.point_feas");
            if (tl.contains("dedup"))
                pf.sweep.dedup_tol = number_at(tl["dedup"], origin, "tolerances.dedup");
            if (tl.contains("certificate"))
                pf.sweep.certificate_tol = number_at(tl["certificate"], origin, "tolerances.certificate");
        }
        if (op.contains("reverify")) pf.sweep.reverify = op["reverify"].get<bool>();
        if (op.contains("polish")) pf.sweep.polish = op["polish"].get<bool>();
        if (op.contains("emit_certificates"))
            pf.sweep.emit_certificates = op["emit_certificates"].get<bool>();
        if (op.contains("workers")) {
            if (!op["workers"].is_number_integer() || op["workers"].get<int>() < 1)
                schema_fail(origin, "options.workers must be a positive integer");
            pf.sweep.workers = op["workers"].get<int>();
        }
        if (op.contains("localization_bound"))
            pf.sweep.localization_bound =
                number_at(op["localization_bound"], origin, "options.localization_bound");
    }

    try {
        pf.problem.validate();
    } catch (const std::invalid_argument& e) {
        schema_fail(origin, e.what());
    }
    return pf;
}

ProblemFile parse_problem(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read problem file: " + path.string());
    return parse_problem_text(buf.str(), path.string());
}

std::string serialize_problem(const ProblemFile& pf) {
    njson doc;
    doc["n"] = pf.problem.n;
    doc["variables"] = pf.variable_names;
    njson objectives = njson::array();
    for (const Polynomial& f : pf.problem.objectives) objectives.push_back(polynomial_to_json(f));
    doc["objectives"] = std::move(objectives);
    njson constraints = njson::array();
    for (const Polynomial& g : pf.problem.constraints) constraints.push_back(polynomial_to_json(g));
    doc["constraints"] = std::move(constraints);
    doc["lambda"] = vector_to_json(pf.problem.lambda);

    njson sweep;
    if (!pf.sweep.z_list.empty()) {
        njson zl = njson::array();
        for (const Eigen::VectorXd& z : pf.sweep.z_list) zl.push_back(vector_to_json(z));
        sweep["z_list"] = std::move(zl);
    }
    if (pf.sweep.box) {
        njson box = njson::array();
        for (Eigen::Index i = 0; i < pf.sweep.box->lo.size(); ++i)
            box.push_back(njson::array({pf.sweep.box->lo(i), pf.sweep.box->hi(i)}));
        sweep["box"] = std::move(box);
    }
    sweep["samples"] = pf.sweep.samples;
    sweep["seed"] = pf.sweep.seed;
    doc["sweep"] = std::move(sweep);

    njson options;
    options["family"] = to_string(pf.sweep.family);
    options["k_max"] = pf.sweep.k_max;
    njson tolerances;
    tolerances["gap"] = pf.sweep.tol_gap;
    tolerances["feas"] = pf.sweep.tol_feas;
    tolerances["rank"] = pf.sweep.tol_rank;
    tolerances["point_feas"] = pf.sweep.point_feas_tol;
    tolerances["dedup"] = pf.sweep.dedup_tol;
    tolerances["certificate"] = pf.sweep.certificate_tol;
    options["tolerances"] = std::move(tolerances);
    options["reverify"] = pf.sweep.reverify;
    options["polish"] = pf.sweep.polish;
    options["emit_certificates"] = pf.sweep.emit_certificates;
    options["workers"] = pf.sweep.workers;
    if (pf.sweep.localization_bound)
        options["localization_bound"] = *pf.sweep.localization_bound;
    doc["options"] = std::move(options);
    return doc.dump(2) + "\n";
}

std::string certificate_to_json(const SosCertificate& cert) {
    njson j;
    j["family"] = to_string(cert.family);
    j["n"] = cert.n;
    j["gamma"] = cert.gamma;
    j["residual"] = cert.residual;
    j["accepted"] = cert.accepted;
    j["grams_psd"] = cert.grams_psd;
    j["scalars_nonneg"] = cert.scalars_nonneg;
    j["sigma0"] = gram_to_json(cert.sigma0, cert.n);
    if (cert.family == RelaxFamily::Q) {
        njson sg = njson::array();
        for (const GramBlock& g : cert.sos_g) sg.push_back(gram_to_json(g, cert.n));
        j["sos_g"] = std::move(sg);
        njson sf = njson::array();
        for (const GramBlock& g : cert.sos_f) sf.push_back(gram_to_json(g, cert.n));
        j["sos_f"] = std::move(sf);
    } else {
        j["mu"] = vector_to_json(cert.mu);
        j["nu"] = vector_to_json(cert.nu);
        j["sigma_lambda"] = gram_to_json(cert.sigma_lambda, cert.n);
        j["localization_bound"] = cert.localization_bound;
    }
    return j.dump();
}

RunPaths write_results(const std::filesystem::path& out_dir, const ProblemFile& pf,
                       const SweepResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

    RunPaths paths;
    paths.results_json = out_dir / "results.json";
    paths.points_csv = out_dir / "efficient_points.csv";
    paths.scatter_dat = out_dir / "pareto_scatter.dat";

    njson doc;
    njson meta;
    meta["tool"] = "paretopt";
    meta["version"] = "0.1.0";
    meta["timestamp"] = utc_timestamp();
    meta["family"] = to_string(pf.sweep.family);
    meta["k_max"] = pf.sweep.k_max;
    meta["samples"] = pf.sweep.samples;
    meta["seed"] = pf.sweep.seed;
    meta["workers"] = pf.sweep.workers;
    meta["solves"] = result.solve_count;
    meta["verified_solves"] = result.verified_count;
    meta["problem"] = njson::parse(serialize_problem(pf));
    doc["meta"] = std::move(meta);

    njson eff = njson::array();
    for (const EfficientPoint& pt : result.efficient) eff.push_back(point_to_json(pt));
    doc["efficient_points"] = std::move(eff);
    njson unv = njson::array();
    for (const EfficientPoint& pt : result.unverified) unv.push_back(point_to_json(pt));
    doc["unverified_points"] = std::move(unv);

    njson diags = njson::array();
    for (const ZDiagnostic& d : result.diagnostics) {
        njson row;
        row["z"] = vector_to_json(d.z);
        row["status"] = to_string(d.status);
        row["k_used"] = d.k_used;
        row["gap"] = d.gap;
        njson ranks = njson::array();
        for (const auto& [t, r] : d.ranks) ranks.push_back(njson::array({t, r}));
        row["ranks"] = std::move(ranks);
        row["verified"] = d.verified;
        row["reverify_ok"] = d.reverify_ok;
        diags.push_back(std::move(row));
    }
    doc["diagnostics"] = std::move(diags);

    {
        std::ofstream out(paths.results_json);
        if (!out) throw IoError("cannot write " + paths.results_json.string());
        out << doc.dump(2) << "\n";
    }

    const int n = pf.problem.n;
    const int p = pf.problem.objective_count();
    {
        std::ofstream out(paths.points_csv);
        if (!out) throw IoError("cannot write " + paths.points_csv.string());
        for (int i = 0; i < n; ++i) out << "x_" << (i + 1) << ",";
        for (int j = 0; j < p; ++j) out << "f_" << (j + 1) << ",";
        for (int i = 0; i < n; ++i) out << "z_" << (i + 1) << ",";
        out << "k_used,verified,reverify_ok\n";
        auto write_row = [&](const EfficientPoint& pt) {
            for (int i = 0; i < n; ++i) out << format17(pt.x(i)) << ",";
            for (int j = 0; j < p; ++j) out << format17(pt.values(j)) << ",";
            for (int i = 0; i < n; ++i) out << format17(pt.z(i)) << ",";
            out << pt.k_used << "," << (pt.verified ? 1 : 0) << "," << (pt.reverify_ok ? 1 : 0)
                << "\n";
        };
        for (const EfficientPoint& pt : result.efficient) write_row(pt);
        for (const EfficientPoint& pt : result.unverified) write_row(pt);
    }
    {
        std::ofstream out(paths.scatter_dat);
        if (!out) throw IoError("cannot write " + paths.scatter_dat.string());
        for (const EfficientPoint& pt : result.efficient) {
            for (int i = 0; i < n; ++i) out << format17(pt.x(i)) << (i + 1 < n ? " " : "");
            out << "\n";
        }
    }
    return paths;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Pareto-efficient solutions of convex polynomial multi-objective programs "
                 "via moment-SDP relaxations"};
    std::string problem_path;
    std::string family;
    std::string box_spec;
    std::string out_dir = ".";
    int k_max = std::numeric_limits<int>::min();
    long long samples = -1;
    long long seed = -1;
    double tol_gap = -1.0;
    double tol_rank = -1.0;
    int workers = 0;
    bool emit_certificates = false;

    app.add_option("--problem", problem_path, "problem JSON file")->required();
    app.add_option("--family", family, "relaxation family")->check(CLI::IsMember({"Q", "P"}));
    app.add_option("--k-max", k_max, "highest relaxation order");
    app.add_option("--samples", samples, "number of sampled z parameters");
    app.add_option("--seed", seed, "sampling seed");
    app.add_option("--box", box_spec, "sampling box \"lo1,hi1;lo2,hi2;...\"");
    app.add_option("--tol-gap", tol_gap, "SDP duality-gap tolerance");
    app.add_option("--tol-rank", tol_rank, "relative rank tolerance");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--emit-certificates", emit_certificates, "attach SOS certificates to results");
    app.add_option("--workers", workers, "parallel workers for the sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitSchema;
    }

    ProblemFile pf;
    try {
        pf = parse_problem(problem_path);
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return kExitSchema;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    }

    if (!family.empty()) pf.sweep.family = family == "Q" ? RelaxFamily::Q : RelaxFamily::P;
    if (k_max != std::numeric_limits<int>::min()) pf.sweep.k_max = k_max;
    if (samples >= 0) pf.sweep.samples = static_cast<int>(samples);
    if (seed >= 0) pf.sweep.seed = static_cast<std::uint64_t>(seed);
    if (tol_gap > 0.0) pf.sweep.tol_gap = tol_gap;
    if (tol_rank > 0.0) pf.sweep.tol_rank = tol_rank;
    if (workers > 0) pf.sweep.workers = workers;
    if (emit_certificates) pf.sweep.emit_certificates = true;

    if (!box_spec.empty()) {
        SweepBox box;
        std::vector<std::pair<double, double>> pairs;
        std::stringstream ss(box_spec);
        std::string part;
        while (std::getline(ss, part, ';')) {
            double lo = 0, hi = 0;
            if (std::sscanf(part.c_str(), "%lf,%lf", &lo, &hi) != 2) {
                std::fprintf(stderr, "schema error: --box expects \"lo1,hi1;lo2,hi2;...\"\n");
                return kExitSchema;
            }
            pairs.emplace_back(lo, hi);
        }
        if (static_cast<int>(pairs.size()) != pf.problem.n) {
            std::fprintf(stderr, "schema error: --box needs one lo,hi pair per variable\n");
            return kExitSchema;
        }
        box.lo.resize(pf.problem.n);
        box.hi.resize(pf.problem.n);
        for (int i = 0; i < pf.problem.n; ++i) {
            box.lo(i) = pairs[static_cast<std::size_t>(i)].first;
            box.hi(i) = pairs[static_cast<std::size_t>(i)].second;
        }
        pf.sweep.box = std::move(box);
    }

    const bool have_box = pf.sweep.box && pf.sweep.samples > 0;
    if (pf.sweep.z_list.empty() && !have_box) {
        std::fprintf(stderr, "no z sources: give sweep.z_list or a box with samples > 0\n");
        return kExitNoZ;
    }

    SweepResult result;
    try {
        result = run_sweep(pf.problem, pf.sweep);
    } catch (const SamplingStalled& e) {
        std::fprintf(stderr, "sampling stalled: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    try {
        RunPaths paths = write_results(out_dir, pf, result);
        std::printf("solved %d parameter(s): %d verified, %zu efficient after filtering, %zu unverified\n",
                    result.solve_count, result.verified_count, result.efficient.size(),
                    result.unverified.size());
        std::printf("wrote %s, %s, %s\n", paths.results_json.string().c_str(),
                    paths.points_csv.string().c_str(), paths.scatter_dat.string().c_str());
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace paretopt
