//! Criterion benchmarks for the wavefactor kernels; see `benches/`.
