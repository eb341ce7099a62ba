#include <benchmark/benchmark.h>

#include "psdl/patch.hpp"

using namespace psdl;

namespace {

NormalField make_field(int size) {
    NormalField field = NormalField::zero(size, size);
    field.vectors.setRandom();
    return field;
}

}  // namespace

static void BM_Extract(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const PatchGrid grid = build_grid(size, size, Window{}, 4);
    const NormalField field = make_field(size);
    for (auto _ : state) {
        Matrix patches = extract(grid, field);
        benchmark::DoNotOptimize(patches.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Extract)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_AdjointAccumulate(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const PatchGrid grid = build_grid(size, size, Window{}, 4);
    const Matrix patches = extract(grid, make_field(size));
    for (auto _ : state) {
        NormalField field = adjoint_accumulate(grid, patches);
        benchmark::DoNotOptimize(field.vectors.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AdjointAccumulate)->RangeMultiplier(2)->Range(64, 512)->Complexity();
