//! How much of the heat capacity the lowest levels carry.

use lqts::experiments::{run_few_level, write_few_level_csv, FewLevelJob};

fn main() -> lqts::Result<()> {
    let job = FewLevelJob::from_json(
        r#"{"model": {"family": "ising", "L": 8}, "beta": 9.0,
            "sweep": {"param": "h", "grid": {"min": 0.0, "max": 2.0, "count": 21}},
            "k_levels": [2, 3]}"#,
    )?;
    let rows = run_few_level(&job)?;
    write_few_level_csv(&rows, std::io::stdout().lock())
}
