//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero on any failed criterion when `ACCEPTANCE_STRICT=1`;
//! otherwise the lines and the summary are the result.

use std::time::Instant;

use num_complex::Complex64;
use su11::verify::{self, Check, Suite, VerifyOptions, VerifyReport};
use su11::{build_coherent_squeezed, build_tmsv, decompose, wigner_grid, Folding, GridSpec, PhaseConvention, WignerField};

struct Line {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn check<'a>(r: &'a VerifyReport, suite: &str, name: &str) -> &'a Check {
    r.suite(suite)
        .and_then(|s| s.check(name))
        .unwrap_or_else(|| panic!("missing check {suite}/{name}"))
}

fn describe(c: &Check) -> String {
    format!("{}: max {:.3e} vs tol {:.0e} over {} cases", c.name, c.max_residual, c.tolerance, c.cases)
}

fn from_checks(id: u32, title: &'static str, checks: &[&Check]) -> Line {
    Line {
        id,
        title,
        passed: checks.iter().all(|c| c.passed),
        detail: checks.iter().map(|c| describe(c)).collect::<Vec<_>>().join("; "),
    }
}

fn criterion_5() -> Line {
    let s = build_tmsv(Complex64::new(0.485, 0.0), 60).unwrap();
    let d = decompose(&s, Folding::Separate).unwrap();
    let grid = GridSpec::disk(1.0, 201).unwrap();
    let f = wigner_grid(&d, &grid, PhaseConvention::PerIrrepNormalized).unwrap();
    let p = f.points[f.argmax_abs().unwrap()].xi;
    let cell = grid.axes().0.step();
    let passed = (p.re - 0.485).abs() <= cell && p.im.abs() <= cell;
    Line {
        id: 5,
        title: "TMSV xi=0.485 argmax on 201x201 disk grid",
        passed,
        detail: format!("argmax at ({:.4}, {:.4}), cell {cell:.4}", p.re, p.im),
    }
}

fn family_split(d: &su11::DecomposedState, grid: &GridSpec, conv: PhaseConvention) -> (WignerField, WignerField, WignerField) {
    let ints = wigner_grid(&d.filter_blocks(|k| k.is_integer()), grid, conv).unwrap();
    let halves = wigner_grid(&d.filter_blocks(|k| !k.is_integer()), grid, conv).unwrap();
    let mut total = ints.clone();
    for (t, h) in total.values.iter_mut().zip(&halves.values) {
        *t += h;
    }
    (total, ints, halves)
}

/// Two strict maxima of `|W|`, apart by more than one cell diagonal, with
/// one dominated by the integer-k family and the other by the half-integer
/// family.
fn criterion_6() -> Line {
    let t = Instant::now();
    let s = build_coherent_squeezed(Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.5), None).unwrap();
    let d = decompose(&s, Folding::Separate).unwrap();
    let grid = GridSpec::disk(1.0, 61).unwrap();
    let cell = grid.axes().0.step();
    let mut passed = true;
    let mut notes = vec![format!("cutoffs {}x{}", s.cutoff_a(), s.cutoff_b())];
    for conv in [PhaseConvention::PerIrrepNormalized, PhaseConvention::Literal] {
        let (total, ints, halves) = family_split(&d, &grid, conv);
        let maxima = total.local_maxima_abs(1e-3);
        let two = maxima.len() == 2;
        let separated = two && (total.points[maxima[0]].xi - total.points[maxima[1]].xi).norm() > cell * 2f64.sqrt();
        let owner = |i: usize| if ints.values[i].norm() >= halves.values[i].norm() { "integer" } else { "half-integer" };
        let owners: Vec<&str> = maxima.iter().map(|&i| owner(i)).collect();
        let attributed = two && owners[0] != owners[1];
        passed &= two && separated && attributed;
        let at: Vec<String> = maxima
            .iter()
            .map(|&i| format!("({:.3},{:.3}) {}", total.points[i].xi.re, total.points[i].xi.im, owner(i)))
            .collect();
        notes.push(format!(
            "{}: {} maxima [{}], two={two} separated={separated} one-per-family={attributed}",
            conv.name(),
            maxima.len(),
            at.join(", ")
        ));
    }
    notes.push(format!("{:.0}s", t.elapsed().as_secs_f64()));
    Line {
        id: 6,
        title: "coherent x squeezed (alpha=1, zeta=4+i/2): two peaks from the two k families",
        passed,
        detail: notes.join("; "),
    }
}

fn main() {
    let t = Instant::now();
    let report = verify::run(Suite::All, &VerifyOptions::default()).expect("verify suites run");
    let verify_secs = t.elapsed().as_secs_f64();

    let geometry = ["group_identities", "disk_preservation", "minkowski_norm", "determinant_under_composition", "mobius_composition"];
    let mut c8 = vec![check(&report, "kernel", "squeeze_unitarity"), check(&report, "interferometer", "direct_unitarity")];
    c8.extend(geometry.iter().map(|n| check(&report, "interferometer", n)));

    let gates: Vec<_> = report.suites.iter().flat_map(|s| s.gates.iter().map(move |g| (s.suite.as_str(), g))).collect();
    let c9 = Line {
        id: 9,
        title: "cutoff-doubling gate on every oracle number",
        passed: gates.iter().all(|(_, g)| g.passed),
        detail: gates
            .iter()
            .map(|(s, g)| {
                format!(
                    "{s}/{}: {} evals, leak {:.1e}, doubling {:.1e}, cutoff <= {}",
                    g.name, g.evaluations, g.max_leak, g.max_convergence_residual, g.max_cutoff
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    };

    let lines = vec![
        from_checks(1, "d-function is the Kronecker delta at tau=0", &[check(&report, "dfunc", "delta_at_zero")]),
        from_checks(2, "d-function exchange symmetry, relative 1e-10", &[check(&report, "dfunc", "exchange_symmetry")]),
        from_checks(3, "disentangled vs boxed kernel elements, 1e-8", &[check(&report, "kernel", "disentangled_vs_boxed")]),
        from_checks(4, "Wigner sum vs Fock oracle, relative 1e-6", &[check(&report, "wigner", "fock_oracle")]),
        criterion_5(),
        criterion_6(),
        from_checks(7, "TMSV 0.5 through gain 0.5, phase pi/2: covariant vs direct on 101x101, 1e-6", &[check(&report, "interferometer", "grid_covariance")]),
        from_checks(8, "unitarity and geometry", &c8),
        c9,
    ];

    println!("verify suites: {verify_secs:.0}s");
    for l in &lines {
        println!("criterion {}: {} - {} ({})", l.id, if l.passed { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    let passed = lines.iter().filter(|l| l.passed).count();
    println!("acceptance: {passed}/{} criteria passed in {:.0}s", lines.len(), t.elapsed().as_secs_f64());
    if passed != lines.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
