//! SMT-LIB2 escape hatch: pipe the current constraint system to an external
//! solver process. Only an `unsat` answer is trusted.

use super::fm::{LinCon, LinExpr};
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

fn term(e: &LinExpr) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (v, c) in &e.coeffs {
        if *c == 1 {
            parts.push(format!("v{v}"));
        } else {
            parts.push(format!("(* {c} v{v})"));
        }
    }
    if e.constant != 0 || parts.is_empty() {
        parts.push(e.constant.to_string());
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

pub fn script(cons: &[LinCon], nvars: usize) -> String {
    let mut out = String::from("(set-logic QF_LIA)\n");
    for v in 0..nvars {
        out.push_str(&format!("(declare-const v{v} Int)\n"));
    }
    for c in cons {
        let line = match c {
            LinCon::Le(e) => format!("(assert (<= {} 0))\n", term(e)),
            LinCon::Eq(e) => format!("(assert (= {} 0))\n", term(e)),
            LinCon::Ne(e) => format!("(assert (not (= {} 0)))\n", term(e)),
        };
        out.push_str(&line);
    }
    out.push_str("(check-sat)\n");
    out
}

/// Ask the external solver whether the system is unsatisfiable.
/// `Some(true)` only on a literal `unsat` answer; solver failures, `sat`,
/// `unknown`, or a timeout all come back untrusted.
pub fn refute_external(exe: &Path, cons: &[LinCon], nvars: usize) -> Option<bool> {
    let mut child = Command::new(exe)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    {
        let stdin = child.stdin.as_mut()?;
        stdin.write_all(script(cons, nvars).as_bytes()).ok()?;
    }
    drop(child.stdin.take());

    let deadline = Instant::now() + Duration::from_secs(5);
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if Instant::now() > deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return None;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(_) => return None,
        }
    }
    let mut out = String::new();
    use std::io::Read;
    child.stdout.take()?.read_to_string(&mut out).ok()?;
    let first = out.lines().map(str::trim).find(|l| !l.is_empty())?;
    match first {
        "unsat" => Some(true),
        "sat" => Some(false),
        _ => None,
    }
}
