//! One line per acceptance criterion. Exits nonzero if any fails.
//! Several criteria run long simulations; use `cargo test --release --test acceptance`
//! when the debug profile is too slow.

use std::process::ExitCode;

use amoebot::verify;

fn main() -> ExitCode {
    let only: Vec<u8> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for c in verify::CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let r = c.run();
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all criteria passed");
        ExitCode::SUCCESS
    }
}
