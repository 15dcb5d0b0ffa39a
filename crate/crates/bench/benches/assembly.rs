//! Timings of assembly, exact rank computation and the adjointness oracle.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use distfe::operators::assemble_with;
use distfe::oracle::{run_oracle, OracleConfig};
use distfe::spaces::LocalElements;
use distfe::verification::{cohomology_dims, composites};
use distfe::{generate_mesh, ComplexKind, GeneratorKind};

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    let square = generate_mesh(GeneratorKind::SquareWithHole, 4).unwrap();
    let cube = generate_mesh(GeneratorKind::Cube, 2).unwrap();
    for (name, mesh, kinds) in [
        ("square-with-hole-4", &square, [ComplexKind::Hessian2d, ComplexKind::Divdiv0_2d]),
        ("cube-2", &cube, [ComplexKind::Hessian3d, ComplexKind::Divdiv0_3d]),
    ] {
        let local = LocalElements::new(mesh).unwrap();
        for kind in kinds {
            group.bench_function(format!("{kind}/{name}"), |b| b.iter(|| assemble_with(kind, mesh, &local).unwrap()));
        }
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verification");
    group.sample_size(10);
    let mesh = generate_mesh(GeneratorKind::Cube, 2).unwrap();
    let local = LocalElements::new(&mesh).unwrap();
    let asm = assemble_with(ComplexKind::Divdiv3d, &mesh, &local).unwrap();
    group.bench_function("composites/divdiv-3d/cube-2", |b| b.iter(|| composites(&asm).unwrap()));
    group.bench_function("cohomology/divdiv-3d/cube-2", |b| b.iter(|| cohomology_dims(&asm)));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let mesh = generate_mesh(GeneratorKind::CrissCrossSquare, 2).unwrap();
    let local = LocalElements::new(&mesh).unwrap();
    let config = OracleConfig { trials: 2, ..OracleConfig::default() };
    for kind in [ComplexKind::Hessian2d, ComplexKind::Divdiv2d] {
        group.bench_function(format!("{kind}/criss-cross-square-2"), |b| {
            b.iter_batched(
                || assemble_with(kind, &mesh, &local).unwrap(),
                |asm| run_oracle(&asm, &mesh, &local, &config).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, verification, oracle);
criterion_main!(benches);
