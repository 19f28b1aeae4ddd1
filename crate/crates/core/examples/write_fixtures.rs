//! Regenerates `fixtures/*.txt` and the random golden file.

use std::path::PathBuf;

use propvote::generators::{fixture, gen_random, FixtureId};
use propvote::Rational;

fn main() -> std::io::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let dir = root.join("fixtures");
    std::fs::create_dir_all(&dir)?;
    for id in FixtureId::ALL {
        std::fs::write(dir.join(format!("{}.txt", id.name())), fixture(id).to_text())?;
    }
    let golden = gen_random(2024, 6, 8, 3, &Rational::new(1, 2)).expect("valid parameters");
    std::fs::write(root.join("crates/core/tests/data/random_seed2024_n6_m8_k3.txt"), golden.to_text())?;
    Ok(())
}
