/*
 * psdl - a photometric stereo toolkit with dictionary-learning regularization.
 *
 * File: tools/psdl.cpp
 *
 * Copyright 2026 The psdl authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "psdl/evaluation.hpp"
#include "psdl/io.hpp"
#include "psdl/solvers.hpp"
#include "psdl/surface.hpp"

namespace {

using namespace psdl;

// Paths created by the running subcommand; removed when the command fails so
// no partial outputs survive.
class OutputTracker {
  public:
    std::string track(const std::string& path) {
        paths_.push_back(path);
        return path;
    }
    void discard_all() {
        for (const auto& path : paths_) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
    }

  private:
    std::vector<std::string> paths_;
};

SolverConfig load_config(const std::string& config_path) {
    if (config_path.empty()) {
        return SolverConfig{};
    }
    return parse_solver_config(read_text_file(config_path));
}

std::string describe_params(const std::string& method,
                            const SolverConfig& config) {
    std::ostringstream out;
    if (method == "ls") {
        return "";
    }
    if (method == "pls") {
        out << "gamma=" << config.gamma << ";p=" << config.p;
        return out.str();
    }
    out << "lambda=" << config.lambda << ";mu=" << config.mu;
    if (method == "pdlnv") {
        out << ";gamma=" << config.gamma << ";p=" << config.p;
    }
    out << ";seed=" << config.seed;
    return out.str();
}

SolveReport run_method(const std::string& method, const Problem& problem,
                       const SolverConfig& config) {
    if (method == "ls") {
        SolveReport report;
        report.normals = solve_ls(problem);
        return report;
    }
    if (method == "pls") {
        return solve_pls(problem, config);
    }
    if (method == "dlnv") {
        return solve_dlnv(problem, config);
    }
    if (method == "pdlnv") {
        return solve_pdlnv(problem, config);
    }
    throw std::invalid_argument("unknown method '" + method + "'");
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> values;
    std::stringstream stream(csv);
    std::string token;
    while (std::getline(stream, token, ',')) {
        if (!token.empty()) {
            values.push_back(std::stod(token));
        }
    }
    if (values.empty()) {
        throw std::invalid_argument("empty value grid '" + csv + "'");
    }
    return values;
}

void write_solve_outputs(OutputTracker& outputs, const std::string& out_dir,
                         const std::string& method, const SolverConfig& config,
                         const Dataset& dataset, const SolveReport& report) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path base(out_dir);

    save_normal_map(report.normals, outputs.track((base / "normals.pfm").string()));
    save_normal_png(report.normals, outputs.track((base / "normals.png").string()));
    if (!report.cost_trace.empty()) {
        write_cost_trace_csv(outputs.track((base / "cost_trace.csv").string()),
                             report.cost_trace, report.sparsity_trace);
    }
    if (report.dictionary.atom_count() > 0) {
        save_dictionary(outputs.track((base / "dictionary.dict").string()),
                        report.dictionary, dataset.problem.grid.window);
    }
    if (dataset.gt_normals) {
        const ErrorSummary summary =
            angular_error(report.normals, *dataset.gt_normals, dataset.mask);
        save_error_map_pfm(outputs.track((base / "errors.pfm").string()),
                           summary.per_pixel_deg, report.normals.rows,
                           report.normals.cols);
        save_error_map_png(outputs.track((base / "errors.png").string()),
                           summary.per_pixel_deg, report.normals.rows,
                           report.normals.cols);
        write_summary_csv(outputs.track((base / "summary.csv").string()),
                          {SummaryRow{dataset.name, method,
                                      describe_params(method, config),
                                      summary.mean_deg, summary.median_deg,
                                      summary.excluded_count}});
        std::cout << "mean " << summary.mean_deg << " deg, median "
                  << summary.median_deg << " deg, excluded "
                  << summary.excluded_count << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"photometric stereo with dictionary-learning regularization"};
    app.require_subcommand(1);

    // ---- render-synth ----
    auto* render = app.add_subcommand(
        "render-synth", "render a synthetic Lambertian sphere dataset");
    std::string render_out;
    int render_size = 64;
    int render_lights = 10;
    std::uint64_t render_seed = 0;
    double render_min_z = 0.7;
    render->add_option("--out", render_out, "output dataset directory")
        ->required();
    render->add_option("--size", render_size, "image size in pixels");
    render->add_option("--lights", render_lights, "number of light directions");
    render->add_option("--seed", render_seed, "light sampling seed");
    render->add_option("--min-z", render_min_z,
                       "lower bound of the light z component");

    // ---- add-noise ----
    auto* noise = app.add_subcommand("add-noise",
                                     "corrupt a dataset with synthetic noise");
    std::string noise_in, noise_out, noise_kind = "poisson";
    double noise_snr = 10.0, noise_fraction = 0.1;
    std::uint64_t noise_seed = 0;
    noise->add_option("--in", noise_in, "input dataset directory")->required();
    noise->add_option("--out", noise_out, "output dataset directory")
        ->required();
    noise
        ->add_option("--kind", noise_kind,
                     "noise kind: poisson or salt_pepper")
        ->check(CLI::IsMember({"poisson", "salt_pepper"}));
    noise->add_option("--snr-db", noise_snr, "target SNR in dB (poisson)");
    noise->add_option("--fraction", noise_fraction,
                      "corrupted fraction (salt_pepper)");
    noise->add_option("--seed", noise_seed, "noise seed");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "estimate normals from a dataset");
    std::string solve_method, solve_dataset, solve_out, solve_config;
    int solve_window = 8, solve_stride = 4;
    solve->add_option("--method", solve_method, "ls, pls, dlnv or pdlnv")
        ->required()
        ->check(CLI::IsMember({"ls", "pls", "dlnv", "pdlnv"}));
    solve->add_option("--dataset", solve_dataset, "dataset directory")
        ->required();
    solve->add_option("--out", solve_out, "output directory")->required();
    solve->add_option("--config", solve_config, "key=value config file");
    solve->add_option("--window", solve_window, "patch window size");
    solve->add_option("--stride", solve_stride, "patch stride");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval",
                                    "angular error of a normal map against "
                                    "ground truth");
    std::string eval_est, eval_gt, eval_mask, eval_csv, eval_pfm, eval_png;
    std::string eval_dataset_name = "dataset", eval_method_name = "method";
    eval->add_option("--est", eval_est, "estimated normals (PFM)")->required();
    eval->add_option("--gt", eval_gt, "ground-truth normals (PFM)")->required();
    eval->add_option("--mask", eval_mask, "evaluation mask (PNG)");
    eval->add_option("--out-csv", eval_csv, "summary CSV path");
    eval->add_option("--errors-pfm", eval_pfm, "per-pixel error map (PFM)");
    eval->add_option("--errors-png", eval_png, "per-pixel error map (PNG)");
    eval->add_option("--dataset-name", eval_dataset_name, "CSV dataset column");
    eval->add_option("--method-name", eval_method_name, "CSV method column");

    // ---- integrate ----
    auto* integ = app.add_subcommand("integrate",
                                     "integrate a normal map into a height map");
    std::string integ_normals, integ_height, integ_obj;
    integ->add_option("--normals", integ_normals, "normal map (PFM)")
        ->required();
    integ->add_option("--out-height", integ_height, "height map output (PFM)");
    integ->add_option("--out-obj", integ_obj, "grid mesh output (OBJ)");

    // ---- sweep ----
    auto* sweep = app.add_subcommand(
        "sweep", "grid sweep over regularization parameters");
    std::string sweep_method = "pdlnv", sweep_dataset, sweep_out, sweep_config;
    std::string sweep_lambda = "0.01,0.1,1", sweep_mu = "0.001,0.003,0.01";
    std::string sweep_p = "";
    int sweep_jobs = 1;
    sweep->add_option("--method", sweep_method, "pls, dlnv or pdlnv")
        ->check(CLI::IsMember({"pls", "dlnv", "pdlnv"}));
    sweep->add_option("--dataset", sweep_dataset, "dataset directory")
        ->required();
    sweep->add_option("--out", sweep_out, "output CSV path")->required();
    sweep->add_option("--config", sweep_config, "base config file");
    sweep->add_option("--lambda", sweep_lambda, "comma-separated lambda grid");
    sweep->add_option("--mu", sweep_mu, "comma-separated mu grid");
    sweep->add_option("--p", sweep_p, "comma-separated segment grid");
    sweep->add_option("--jobs", sweep_jobs, "parallel workers");

    // ---- dict-study ----
    auto* study = app.add_subcommand(
        "dict-study",
        "sparsity vs representation error of dictionaries learned on "
        "least-squares normals");
    std::string study_dataset, study_out;
    std::string study_mu = "2,1,0.5,0.2,0.1,0.05,0.02";
    int study_size = 64, study_passes = 20, study_atoms = 0;
    std::uint64_t study_seed = 0;
    study->add_option("--dataset", study_dataset,
                      "dataset directory (default: synthetic sphere)");
    study->add_option("--out", study_out, "output CSV path")->required();
    study->add_option("--mu", study_mu, "comma-separated mu grid");
    study->add_option("--synth-size", study_size,
                      "sphere size when no dataset is given");
    study->add_option("--passes", study_passes, "sweeps per mu");
    study->add_option("--atoms", study_atoms, "atom count (0 = square)");
    study->add_option("--seed", study_seed, "seed for synthetic lights");

    CLI11_PARSE(app, argc, argv);

    OutputTracker outputs;
    try {
        if (*render) {
            const LightMatrix lights =
                random_lights(render_lights, render_seed, render_min_z);
            const SphereScene scene = render_sphere(render_size, lights);
            save_dataset(render_out, scene.images, lights, &scene.normals,
                         &scene.mask);
            std::cout << "wrote " << render_out << " (" << render_size << "x"
                      << render_size << ", " << render_lights << " lights)\n";
        } else if (*noise) {
            Dataset dataset = load_dataset(noise_in);
            ImageStack corrupted =
                noise_kind == "poisson"
                    ? add_poisson_noise(dataset.problem.images, noise_snr,
                                        noise_seed)
                    : add_salt_pepper(dataset.problem.images, noise_fraction,
                                      noise_seed);
            const double achieved =
                compute_snr(dataset.problem.images, corrupted);
            save_dataset(noise_out, corrupted, dataset.problem.lights,
                         dataset.gt_normals ? &*dataset.gt_normals : nullptr,
                         dataset.mask ? &*dataset.mask : nullptr);
            std::cout << "wrote " << noise_out << " (SNR " << achieved
                      << " dB)\n";
        } else if (*solve) {
            const SolverConfig config = load_config(solve_config);
            const Window window{solve_window, solve_window, 3};
            const Dataset dataset =
                load_dataset(solve_dataset, window, solve_stride,
                             config.p > 0 ? config.p : 2);
            const SolveReport report =
                run_method(solve_method, dataset.problem, config);
            write_solve_outputs(outputs, solve_out, solve_method, config,
                                dataset, report);
        } else if (*eval) {
            const NormalField est = load_normal_map(eval_est);
            const NormalField gt = load_normal_map(eval_gt);
            std::optional<PixelMask> mask;
            if (!eval_mask.empty()) {
                mask = load_mask_png(eval_mask, est.rows, est.cols);
            }
            const ErrorSummary summary = angular_error(est, gt, mask);
            std::cout << "mean " << summary.mean_deg << " deg, median "
                      << summary.median_deg << " deg, excluded "
                      << summary.excluded_count << "\n";
            if (!eval_csv.empty()) {
                write_summary_csv(
                    outputs.track(eval_csv),
                    {SummaryRow{eval_dataset_name, eval_method_name, "",
                                summary.mean_deg, summary.median_deg,
                                summary.excluded_count}});
            }
            if (!eval_pfm.empty()) {
                save_error_map_pfm(outputs.track(eval_pfm),
                                   summary.per_pixel_deg, est.rows, est.cols);
            }
            if (!eval_png.empty()) {
                save_error_map_png(outputs.track(eval_png),
                                   summary.per_pixel_deg, est.rows, est.cols);
            }
        } else if (*integ) {
            const NormalField normals = load_normal_map(integ_normals);
            const HeightMap map = integrate(gradients_from_normals(normals));
            if (integ_height.empty() && integ_obj.empty()) {
                throw std::invalid_argument(
                    "integrate: pass --out-height and/or --out-obj");
            }
            if (!integ_height.empty()) {
                save_height_pfm(outputs.track(integ_height), map);
            }
            if (!integ_obj.empty()) {
                save_obj(outputs.track(integ_obj), map);
            }
        } else if (*sweep) {
            const SolverConfig base = load_config(sweep_config);
            const std::vector<double> lambdas = parse_grid(sweep_lambda);
            const std::vector<double> mus = parse_grid(sweep_mu);
            std::vector<double> ps;
            if (!sweep_p.empty()) {
                ps = parse_grid(sweep_p);
            } else {
                ps = {static_cast<double>(base.p)};
            }
            const Dataset dataset = load_dataset(sweep_dataset);
            if (!dataset.gt_normals) {
                throw std::runtime_error(
                    "sweep: dataset has no normal_gt.pfm to evaluate against");
            }

            struct Point {
                SolverConfig config;
                SummaryRow row;
            };
            std::vector<Point> points;
            for (double p : ps) {
                for (double lambda : lambdas) {
                    for (double mu : mus) {
                        Point point;
                        point.config = base;
                        point.config.lambda = lambda;
                        point.config.mu = mu;
                        point.config.p = static_cast<int>(p);
                        points.push_back(point);
                    }
                }
            }

            std::atomic<std::size_t> next{0};
            const int jobs =
                std::max(1, std::min<int>(sweep_jobs,
                                          static_cast<int>(points.size())));
            auto worker = [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= points.size()) {
                        return;
                    }
                    Point& point = points[i];
                    const SolveReport report =
                        run_method(sweep_method, dataset.problem, point.config);
                    const ErrorSummary summary = angular_error(
                        report.normals, *dataset.gt_normals, dataset.mask);
                    point.row = SummaryRow{
                        dataset.name, sweep_method,
                        describe_params(sweep_method, point.config),
                        summary.mean_deg, summary.median_deg,
                        summary.excluded_count};
                }
            };
            std::vector<std::thread> threads;
            for (int t = 0; t < jobs; ++t) {
                threads.emplace_back(worker);
            }
            for (auto& thread : threads) {
                thread.join();
            }

            std::vector<SummaryRow> rows;
            rows.reserve(points.size());
            double best = std::numeric_limits<double>::infinity();
            for (const auto& point : points) {
                rows.push_back(point.row);
                best = std::min(best, point.row.mean_deg);
            }
            write_summary_csv(outputs.track(sweep_out), rows);
            std::cout << "wrote " << rows.size() << " rows, best mean " << best
                      << " deg\n";
        } else if (*study) {
            NormalField normals;
            Window window{8, 8, 3};
            if (!study_dataset.empty()) {
                const Dataset dataset = load_dataset(study_dataset);
                normals = solve_ls(dataset.problem);
            } else {
                const LightMatrix lights = random_lights(10, study_seed);
                const SphereScene scene = render_sphere(study_size, lights);
                Problem problem = make_problem(scene.images, lights);
                normals = solve_ls(problem);
            }
            const PatchGrid grid =
                build_grid(normals.rows, normals.cols, window, 4);
            const Matrix patches = extract(grid, normals);

            std::ofstream out(outputs.track(study_out));
            if (!out) {
                throw std::runtime_error(study_out + ": cannot open for writing");
            }
            out << "mu,nonzero_fraction,nsre\n";
            out.precision(10);
            for (double mu : parse_grid(study_mu)) {
                const LearnResult result = learn_dictionary(
                    patches, window, mu, 1e10,
                    study_atoms > 0 ? study_atoms : window.size(),
                    study_passes);
                out << mu << "," << result.trace.nonzero_fraction.back() << ","
                    << result.trace.nsre.back() << "\n";
                std::cout << "mu " << mu << ": " << std::fixed
                          << 100.0 * result.trace.nonzero_fraction.back()
                          << "% nonzero, nsre "
                          << result.trace.nsre.back() << "\n";
                std::cout.unsetf(std::ios_base::floatfield);
            }
        }
        return 0;
    } catch (const std::exception& e) {
        outputs.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
