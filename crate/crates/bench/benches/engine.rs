use criterion::{criterion_group, criterion_main};

criterion_group!(benches, structvar_bench::symbolic, structvar_bench::catalog, structvar_bench::numeric);
criterion_main!(benches);
