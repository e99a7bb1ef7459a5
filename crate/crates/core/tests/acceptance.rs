//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use cgo_lab::config::ExperimentConfig;
use cgo_lab::experiments::{self, Report};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default_config();
    let checks: [fn(&ExperimentConfig) -> Report; 10] = [
        experiments::appendix_lattice,
        experiments::appendix_scaling,
        experiments::cauchy_checks,
        experiments::ibp_check,
        experiments::t_decay,
        experiments::s_decay,
        experiments::cgo_checks,
        experiments::stationary_checks,
        experiments::reconstruct_checks,
        experiments::dn_checks,
    ];
    let mut failed = 0;
    for check in checks {
        for v in check(&cfg).verdicts {
            let status = if v.pass { "PASS" } else { "FAIL" };
            println!(
                "{status} criterion {}: {} ({:.1}s, budget {:.0}s{})",
                v.criterion,
                v.name,
                v.seconds,
                v.budget_seconds,
                if v.checks_pass { "" } else { ", checks failed" }
            );
            println!("    {}", v.metrics);
            if !v.pass {
                failed += 1;
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
