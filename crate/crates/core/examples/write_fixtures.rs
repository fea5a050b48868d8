//! Regenerates the scene files in `fixtures/` from their builders.
//!
//! ```text
//! cargo run --example write_fixtures [-- OUT_DIR]
//! ```

use regrasp::scene::{fixtures, save_scene};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    for scene in fixtures::all() {
        let path = dir.join(format!("{}.json", scene.name));
        save_scene(&scene, &path)?;
        println!("{} ({} obstacles)", path.display(), scene.obstacles.len());
    }
    Ok(())
}
