//! Library side of the `wld` command-line tool, kept separate so that
//! command outputs and the verify suite can be tested directly.

pub mod commands;
pub mod verify;

/// Worker count from `--threads`, falling back to `WLD_THREADS`; `None` leaves rayon's default.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> anyhow::Result<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(s)) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("WLD_THREADS must be a positive integer, got {s:?}"))?,
        _ => return Ok(None),
    };
    if n == 0 {
        anyhow::bail!("thread count must be at least 1");
    }
    Ok(Some(n))
}
