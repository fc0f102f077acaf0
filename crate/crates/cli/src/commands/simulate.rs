use anyhow::{bail, Result};
use serde::Serialize;
use zani_core::distributions::sample;
use zani_core::rng::rng_from_seed;
use zani_core::CountVector;

use crate::cli::SimulateArgs;
use crate::io::{dataset_csv, write_atomic, Metadata};
use crate::params::ParamsFile;
use crate::Context;

#[derive(Debug, Serialize)]
struct SimulateRecord<'a> {
    params: &'a ParamsFile,
    n: usize,
    trials: u64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    metadata: Metadata,
    model: &'static str,
    params: &'a ParamsFile,
    n: usize,
    trials: u64,
}

/// Writes `<out>/<name>` and the sidecar `<out>/<stem>.meta.json`.
pub fn run(ctx: &Context, args: &SimulateArgs) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let p = args.params.resolve()?;
    let seed = ctx.seed();
    let mut rng = rng_from_seed(seed);
    let rows: Vec<CountVector> = (0..args.n)
        .map(|_| sample(args.trials, &p.params, &mut rng))
        .collect();
    let record = SimulateRecord { params: &p.record, n: args.n, trials: args.trials, seed };
    let sidecar = Sidecar {
        metadata: Metadata::new(seed, &record)?,
        model: p.kind.name(),
        params: &p.record,
        n: args.n,
        trials: args.trials,
    };
    let path = ctx.out.join(&args.name);
    write_atomic(&path, &dataset_csv(&rows)?)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let meta_path = ctx.out.join(format!("{stem}.meta.json"));
    let mut json = serde_json::to_vec_pretty(&sidecar)?;
    json.push(b'\n');
    write_atomic(&meta_path, &json)?;
    log::info!("wrote {} and {}", path.display(), meta_path.display());
    Ok(())
}
