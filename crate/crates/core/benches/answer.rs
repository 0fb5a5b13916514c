//! Answering throughput on the standard synthetic corpus: one worker on the
//! calling thread against the rayon pool. Build with
//! `--no-default-features` to measure the sequential-only binary.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use swcu_core::corpus::Split;
use swcu_core::synthetic::{SyntheticCorpus, SyntheticParams};
use swcu_core::{Config, Engine, Mode};

fn answer_split(c: &mut Criterion) {
    let snapshot = SyntheticCorpus::generate(&SyntheticParams::standard(7))
        .snapshot(Mode::Worldtree)
        .expect("synthetic snapshot");
    let engine = Engine::new(&snapshot, Config::default()).expect("engine");
    let questions = snapshot.questions_in(Split::Test);

    let mut group = c.benchmark_group("answer_all");
    group.sample_size(10);
    group.throughput(Throughput::Elements(questions.len() as u64));
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut settings = vec![("sequential", 1)];
    if cfg!(feature = "parallel") {
        settings.push(("parallel", 0));
        if threads > 2 {
            settings.push(("parallel", 2));
        }
    }
    for (name, workers) in settings {
        let label = if workers == 0 { "all".to_string() } else { workers.to_string() };
        group.bench_with_input(BenchmarkId::new(name, label), &workers, |b, &w| {
            b.iter(|| engine.answer_all(&questions, w).expect("answers"))
        });
    }
    group.finish();
}

fn analyze_hypothesis(c: &mut Criterion) {
    let snapshot = SyntheticCorpus::generate(&SyntheticParams::standard(7))
        .snapshot(Mode::Worldtree)
        .expect("synthetic snapshot");
    let engine = Engine::new(&snapshot, Config::default()).expect("engine");
    let question = snapshot.questions_in(Split::Test)[0];
    let hypothesis = &question.hypotheses[0];
    c.bench_function("analyze_one_hypothesis", |b| b.iter(|| engine.analyze(hypothesis)));
}

criterion_group!(benches, answer_split, analyze_hypothesis);
criterion_main!(benches);
