//! Writes a synthetic corpus (`tables/`, `questions/`, `wordnet/`) to a
//! directory: `cargo run --example write_synthetic -- OUT_DIR [SEED] [tiny]`.

use swcu_core::synthetic::{SyntheticCorpus, SyntheticParams};

fn main() -> swcu_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "synthetic".into());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let params = match args.next().as_deref() {
        Some("tiny") => SyntheticParams::tiny(seed),
        _ => SyntheticParams::standard(seed),
    };
    SyntheticCorpus::generate(&params).write(&out)?;
    println!("wrote {out}");
    Ok(())
}
