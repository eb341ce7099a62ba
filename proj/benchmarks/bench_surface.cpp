#include <benchmark/benchmark.h>

#include "psdl/evaluation.hpp"
#include "psdl/surface.hpp"

using namespace psdl;

static void BM_Integrate(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const LightMatrix lights = random_lights(10, 3);
    const SphereScene scene = render_sphere(size, lights);
    const GradientField gradients = gradients_from_normals(scene.normals);
    for (auto _ : state) {
        HeightMap map = integrate(gradients);
        benchmark::DoNotOptimize(map.heights.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Integrate)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
