pub mod acuity_map;
pub mod apply;
pub mod certify;
pub mod scanpath;
pub mod sweep;

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Write report text to a file or stdout.
pub fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(CliError::from)?;
            Ok(())
        }
    }
}

/// A rayon pool sized to the requested worker count.
pub fn worker_pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::usage(format!("cannot build worker pool: {e}")))
}
