//! Regenerates the bundled synthetic corpus.
//!
//! ```text
//! cargo run -p ctxscore --example make_fixtures -- crates/ctxscore/fixtures
//! ```

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")));
    ctxscore::synthetic::write_fixtures(&dir)?;
    println!("wrote fixtures to {}", dir.display());
    Ok(())
}
