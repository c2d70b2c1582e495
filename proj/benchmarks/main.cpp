#include <benchmark/benchmark.h>

// benchmark_main ships as a static archive with compiler-specific LTO
// bytecode; defining main here keeps the link to the shared library.
BENCHMARK_MAIN();
