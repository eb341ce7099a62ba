#include <benchmark/benchmark.h>

#include "psdl/evaluation.hpp"
#include "psdl/solvers.hpp"

using namespace psdl;

namespace {

Problem sphere_problem(int size, int lights) {
    const LightMatrix L = random_lights(lights, 1);
    const SphereScene scene = render_sphere(size, L);
    return make_problem(scene.images, L);
}

}  // namespace

static void BM_SolveLs(benchmark::State& state) {
    const Problem problem = sphere_problem(static_cast<int>(state.range(0)), 10);
    for (auto _ : state) {
        NormalField normals = solve_ls(problem);
        benchmark::DoNotOptimize(normals.vectors.data());
    }
}
BENCHMARK(BM_SolveLs)->Arg(64)->Arg(128)->Arg(256);

static void BM_DictPass(benchmark::State& state) {
    const Problem problem = sphere_problem(static_cast<int>(state.range(0)), 10);
    const NormalField normals = solve_ls(problem);
    const Matrix patches = extract(problem.grid, normals);
    Dictionary dict = dct_dictionary(problem.grid.window, 192);
    SparseCodes codes;
    codes.codes = Matrix::Zero(192, patches.cols());
    for (auto _ : state) {
        dict_pass(patches, dict, codes, 0.05, 1e10);
        benchmark::DoNotOptimize(codes.codes.data());
    }
}
BENCHMARK(BM_DictPass)->Arg(64)->Arg(128);

static void BM_ProxStep(benchmark::State& state) {
    const Problem problem = sphere_problem(static_cast<int>(state.range(0)), 10);
    NormalField normals = solve_ls(problem);
    Dictionary dict = dct_dictionary(problem.grid.window, 192);
    SparseCodes codes;
    codes.codes = Matrix::Zero(192, problem.grid.patch_count());
    const double norm = spectral_norm(problem.lights);
    const double tau = 1.0 / (2.0 * norm * norm);
    for (auto _ : state) {
        normals = prox_normal_step(normals, problem.images.values,
                                   problem.lights, dict, codes, problem.grid,
                                   0.1, tau);
        benchmark::DoNotOptimize(normals.vectors.data());
    }
}
BENCHMARK(BM_ProxStep)->Arg(64)->Arg(128);

static void BM_SolveDlnv(benchmark::State& state) {
    const Problem problem = sphere_problem(64, 10);
    SolverConfig config;
    config.outer_iters = static_cast<int>(state.range(0));
    for (auto _ : state) {
        SolveReport report = solve_dlnv(problem, config);
        benchmark::DoNotOptimize(report.normals.vectors.data());
    }
}
BENCHMARK(BM_SolveDlnv)->Arg(1)->Arg(5);
