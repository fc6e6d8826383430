#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopforge/chain.hpp"
#include "loopforge/graph_io.hpp"
#include "loopforge/isomorphism.hpp"
#include "loopforge/lerw.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/soup.hpp"
#include "loopforge/spanning.hpp"
#include "loopforge/zipper.hpp"
#include "verify_suites.hpp"

namespace {

using namespace loopforge;

int worker_count() {
    if (const char* env = std::getenv("LOOPFORGE_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

std::string fmtg(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

struct Output {
    std::string path; // empty = stdout
    std::ostringstream buffer;

    ~Output() = default;
    void flush() {
        if (path.empty()) {
            std::cout << buffer.str();
        } else {
            std::ofstream f(path);
            f << buffer.str();
        }
    }
};

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::vector<VertexId> parse_ids(const std::string& csv) {
    std::vector<VertexId> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
    return out;
}

int cmd_info(const std::string& graph_path) {
    WeightedChain chain = load_chain_file(graph_path);
    Classification c = classify_weight(chain);
    std::cout << "vertices: " << chain.interior_size() << "\n";
    std::cout << "boundary: " << chain.boundary_size() << "\n";
    std::cout << "symmetry: " << to_string(chain.symmetry()) << "\n";
    std::cout << "classification: " << to_string(c.kind) << "\n";
    std::cout << "spectral radius |Q|: " << fmtg(c.rho_abs) << "\n";
    std::cout << "spectral radius Q: " << fmtg(c.rho_plain) << "\n";
    if (c.kind != WeightClass::divergent) {
        GreenData g = green_function(chain);
        std::cout << "det(I-Q): " << fmtg(g.det_iq.real());
        if (g.det_iq.imag() != 0.0) std::cout << " + " << fmtg(g.det_iq.imag()) << "i";
        std::cout << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& graph_path,
               const std::string& points, const std::string& out_path, double tolerance) {
    Output out;
    out.path = out_path;
    std::vector<verify::Check> checks;
    if (!graph_path.empty() && suite == "fomin") {
        WeightedChain chain = load_chain_file(graph_path);
        checks = verify::run_fomin_on(chain, parse_ids(points));
    } else {
        checks = verify::run_suite(suite, seed, worker_count(), tolerance);
    }
    int failed = 0;
    for (const auto& c : checks) {
        out.buffer << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        if (!c.pass) ++failed;
    }
    out.buffer << "suite " << suite << ": " << (checks.size() - failed) << "/" << checks.size()
               << " checks passed (seed " << seed << ")\n";
    out.flush();
    return failed == 0 ? 0 : 1;
}

int cmd_sample_lerw(const std::string& graph_path, VertexId from, long n, std::uint64_t seed,
                    const std::string& format, const std::string& out_path) {
    WeightedChain chain = load_chain_file(graph_path);
    int x = chain.index_of(from);
    if (x < 0 || !chain.is_interior(x)) throw invalid_input("sample lerw: --from must name an interior vertex");
    Rng rng = derive_stream(seed, 0);
    Output out;
    out.path = out_path;
    if (format == "csv") out.buffer << "sample,length,path\n";
    for (long i = 0; i < n; ++i) {
        Saw eta = sample_lerw(chain, x, rng).erased;
        if (format == "csv") {
            out.buffer << i << "," << eta.length() << ",";
            for (std::size_t j = 0; j < eta.v.size(); ++j)
                out.buffer << (j ? " " : "") << chain.id_of(eta.v[j]);
            out.buffer << "\n";
        } else {
            out.buffer << "[";
            for (std::size_t j = 0; j < eta.v.size(); ++j)
                out.buffer << (j ? "," : "") << chain.id_of(eta.v[j]);
            out.buffer << "]\n";
        }
    }
    out.flush();
    return 0;
}

int cmd_sample_ust(const std::string& graph_path, VertexId root, long n, std::uint64_t seed,
                   const std::string& out_path) {
    WeightedChain chain = load_chain_file(graph_path);
    int r = chain.index_of(root);
    if (r < 0) throw invalid_input("sample ust: unknown root id");
    if (!(chain.boundary_size() == 1 && chain.is_boundary(r)))
        throw invalid_input("sample ust: the graph boundary must be exactly the root vertex");
    Rng rng = derive_stream(seed, 0);
    Output out;
    out.path = out_path;
    for (long i = 0; i < n; ++i) {
        SpanningTree t = wilson(chain, rng);
        out.buffer << "{\"sample\":" << i << ",\"edges\":[";
        bool first = true;
        for (auto [v, p] : tree_edges(t)) {
            if (!first) out.buffer << ",";
            first = false;
            out.buffer << "[" << chain.id_of(v) << "," << chain.id_of(p) << "]";
        }
        out.buffer << "]}\n";
    }
    out.flush();
    return 0;
}

int cmd_sample_gff(const std::string& graph_path, const std::string& method, long n,
                   std::uint64_t seed, const std::string& out_path) {
    WeightedChain chain = load_chain_file(graph_path);
    Rng rng = derive_stream(seed, 0);
    Output out;
    out.path = out_path;
    out.buffer << "sample";
    for (int v = 0; v < chain.interior_size(); ++v) out.buffer << ",z" << chain.id_of(v);
    out.buffer << "\n";
    if (method == "direct") {
        GreenData g = green_function(chain);
        for (long i = 0; i < n; ++i) {
            FieldSample f = sample_gff(g.green, rng);
            out.buffer << i;
            for (double z : f.z) out.buffer << "," << fmtg(z);
            out.buffer << "\n";
        }
    } else if (method == "lupu") {
        EdgeIndex ei = EdgeIndex::from_chain(chain);
        std::vector<int> ordering;
        for (int v = 0; v < chain.interior_size(); ++v) ordering.push_back(v);
        BubbleSampler bs(chain, ordering);
        std::vector<Complex> theta = theta_from_chain(chain, ei);
        for (long i = 0; i < n; ++i) {
            FieldSample f = lupu_sample(bs, ei, theta, rng);
            out.buffer << i;
            for (double z : f.z) out.buffer << "," << fmtg(z);
            out.buffer << "\n";
        }
    } else {
        throw invalid_input("sample gff: method must be direct or lupu");
    }
    out.flush();
    return 0;
}

int cmd_experiment_odd_slope(const std::string& radii_csv, const std::string& out_path) {
    std::vector<double> radii = parse_doubles(radii_csv);
    OddLoopSlopeResult res = odd_loop_slope(radii);
    Output out;
    out.path = out_path;
    out.buffer << "radius,vertices,odd_loop_mass\n";
    for (const auto& row : res.rows)
        out.buffer << fmtg(row.radius) << "," << row.vertices << "," << fmtg(row.mass) << "\n";
    out.buffer << "# slope_vs_log_r," << fmtg(res.slope) << "\n";
    out.buffer << "# target,0.125\n";
    out.flush();
    return 0;
}

int cmd_experiment_crossing(int n, double rmin, double rmax, int terms, const std::string& ys_csv,
                            const std::string& out_path) {
    std::vector<double> ys =
        ys_csv.empty() ? std::vector<double>{} : parse_doubles(ys_csv);
    if (ys.empty()) {
        // symmetric default heights around pi/2
        for (int i = 0; i < n; ++i)
            ys.push_back(M_PI / 2 + 0.35 * (2.0 * i - (n - 1)) / std::max(1, n - 1));
        if (n == 1) ys = {M_PI / 2};
    }
    std::vector<double> grid;
    for (double r = rmin; r <= rmax + 1e-9; r += 0.25) grid.push_back(r);
    CrossingResult res = crossing_exponent(n, grid, ys, terms);
    Output out;
    out.path = out_path;
    out.buffer << "r,logdet\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.buffer << fmtg(res.r_grid[i]) << "," << fmtg(res.logdet[i]) << "\n";
    out.buffer << "# slope," << fmtg(res.slope) << "\n";
    out.buffer << "# target," << fmtg(n * (n + 1) / 2.0) << "\n";
    if (n == 2) {
        out.buffer << "# ratio_constant," << fmtg(res.ratio_constant) << "\n";
        out.buffer << "# c_formula," << fmtg(res.c_formula) << "\n";
    }
    out.flush();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"loopforge: loop measures, loop-erased walks, spanning trees, soups and fields"};
    app.require_subcommand(1);

    std::string graph_path, out_path, format = "csv", suite = "all", points, method = "direct";
    std::string radii = "8,12,16,24,32", ys;
    std::uint64_t seed = 7;
    long nsamples = 1;
    VertexId from = 0, root = 0;
    int cross_n = 2, terms = 200;
    double rmin = 3.0, rmax = 6.0, tolerance = 1e-10;

    auto* info = app.add_subcommand("info", "classification and Green data of a graph");
    info->add_option("--graph", graph_path, "graph JSON")->required();

    auto* verify = app.add_subcommand("verify", "run verification suites");
    verify->add_option("--suite", suite, "suite name or 'all'");
    verify->add_option("--seed", seed, "rng seed");
    verify->add_option("--tolerance", tolerance, "identity-check tolerance override");
    verify->add_option("--graph", graph_path, "graph JSON (fomin suite)");
    verify->add_option("--points", points, "x1,x2,y1,y2 vertex ids (fomin suite)");
    verify->add_option("--out", out_path, "write the report to a file");

    auto* sample = app.add_subcommand("sample", "samplers");
    sample->require_subcommand(1);
    auto* slerw = sample->add_subcommand("lerw", "loop-erased random walks");
    slerw->add_option("--graph", graph_path, "graph JSON")->required();
    slerw->add_option("--from", from, "start vertex id")->required();
    slerw->add_option("--n", nsamples, "number of samples");
    slerw->add_option("--seed", seed, "rng seed");
    slerw->add_option("--format", format, "csv or json lines");
    slerw->add_option("--out", out_path, "output file");
    auto* sust = sample->add_subcommand("ust", "wired uniform spanning trees");
    sust->add_option("--graph", graph_path, "graph JSON")->required();
    sust->add_option("--root", root, "root vertex id")->required();
    sust->add_option("--n", nsamples, "number of samples");
    sust->add_option("--seed", seed, "rng seed");
    sust->add_option("--out", out_path, "output file");
    auto* sgff = sample->add_subcommand("gff", "gaussian field samples");
    sgff->add_option("--graph", graph_path, "graph JSON")->required();
    sgff->add_option("--method", method, "direct or lupu");
    sgff->add_option("--n", nsamples, "number of samples");
    sgff->add_option("--seed", seed, "rng seed");
    sgff->add_option("--out", out_path, "output file");

    auto* experiment = app.add_subcommand("experiment", "Z^2 experiments");
    experiment->require_subcommand(1);
    auto* slope = experiment->add_subcommand("odd-loop-slope", "odd loop mass vs log r");
    slope->add_option("--radii", radii, "comma-separated disc radii");
    slope->add_option("--out", out_path, "output CSV");
    auto* cross = experiment->add_subcommand("crossing-exponent", "strip determinant decay");
    cross->add_option("--n", cross_n, "number of paths");
    cross->add_option("--rmin", rmin, "smallest separation");
    cross->add_option("--rmax", rmax, "largest separation");
    cross->add_option("--terms", terms, "series terms");
    cross->add_option("--y", ys, "comma-separated heights in (0,pi)");
    cross->add_option("--out", out_path, "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (info->parsed()) return cmd_info(graph_path);
        if (verify->parsed()) return cmd_verify(suite, seed, graph_path, points, out_path, tolerance);
        if (sample->parsed()) {
            if (slerw->parsed()) return cmd_sample_lerw(graph_path, from, nsamples, seed, format, out_path);
            if (sust->parsed()) return cmd_sample_ust(graph_path, root, nsamples, seed, out_path);
            if (sgff->parsed()) return cmd_sample_gff(graph_path, method, nsamples, seed, out_path);
        }
        if (experiment->parsed()) {
            if (slope->parsed()) return cmd_experiment_odd_slope(radii, out_path);
            if (cross->parsed())
                return cmd_experiment_crossing(cross_n, rmin, rmax, terms, ys, out_path);
        }
    } catch (const schema_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
