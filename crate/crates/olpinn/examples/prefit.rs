//! Pretrain the Burgers operator models into the acceptance-suite cache.

use olpinn::deeponet::PretrainConfig;
use olpinn::harness::{run_pretrain, save_checkpoint, Benchmark, CheckpointPayload};
use std::time::Instant;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../target/tmp/acceptance-cache");
    std::fs::create_dir_all(&dir).unwrap();
    for benchmark in [Benchmark::BurgersCase1, Benchmark::BurgersCase2] {
        let path = dir.join(format!("{}.ckpt", benchmark.name()));
        if path.exists() {
            println!("{} already cached", benchmark.name());
            continue;
        }
        let t0 = Instant::now();
        let cfg = PretrainConfig::default();
        let (model, history) = run_pretrain(benchmark, &cfg, None).unwrap();
        println!(
            "{}: {} epochs, final mse {:.3e}, {:.0}s",
            benchmark.name(),
            history.len(),
            history.last().unwrap(),
            t0.elapsed().as_secs_f64()
        );
        save_checkpoint(&CheckpointPayload::DeepONet(model), &path).unwrap();
    }
}
