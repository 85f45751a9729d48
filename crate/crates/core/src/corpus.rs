//! Built-in protocols.
//!
//! All of them use uniform input distributions and computational-basis
//! checks: Bob accepts `y` when the registers he ends up holding encode `y`.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{re, CMatrix, CVector};
use crate::protocol::{Protocol, Register, Step};
use crate::state::{Party, Povm};

/// Permutation matrix sending basis state `j` to `f(j)`.
pub fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(f(j), j)] = re(1.0);
    }
    m
}

/// Controlled NOT on (control, target) qubits.
pub fn cnot() -> CMatrix {
    permutation(4, |j| if j >= 2 { j ^ 1 } else { j })
}

/// `|r, m⟩ → |r, m ⊕ r⟩` on two `dim`-level registers (`dim` a power of two).
pub fn xor_copy(dim: usize) -> CMatrix {
    permutation(dim * dim, |j| {
        let (r, m) = (j / dim, j % dim);
        r * dim + (m ^ r)
    })
}

/// Real unitary whose first column is the unit vector `v`.
pub fn state_preparation(v: &[f64]) -> CMatrix {
    let d = v.len();
    let mut w = CVector::from_iterator(d, v.iter().map(|&x| re(-x)));
    w[0] += re(1.0);
    let norm = w.norm();
    let mut h = crate::linalg::identity(d);
    if norm > 1e-14 {
        let u = w / re(norm);
        h -= (&u * u.adjoint()) * re(2.0);
    }
    h
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / (1usize << n) as f64; 1 << n]
}

fn qubits(prefix: &str, n: usize, owner: Party) -> Vec<Register> {
    (1..=n).map(|i| Register::new(format!("{prefix}{i}"), 2, owner)).collect()
}

fn basis_projector(dim: usize, index: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(index, index)] = re(1.0);
    m
}

/// Copies input bit registers `from` onto fresh qubits `to`, one CNOT each,
/// then sends the copies.
fn copy_and_send(from: &[usize], to: &[usize]) -> Vec<Step> {
    let mut steps: Vec<Step> = from
        .iter()
        .zip(to)
        .map(|(&f, &t)| Step {
            actor: Party::Alice,
            targets: vec![f, t],
            unitary: cnot(),
            send: vec![],
        })
        .collect();
    match steps.last_mut() {
        Some(last) => last.send = to.to_vec(),
        None => {
            if !to.is_empty() {
                steps.push(Step {
                    actor: Party::Alice,
                    targets: vec![],
                    unitary: crate::linalg::identity(1),
                    send: to.to_vec(),
                });
            }
        }
    }
    steps
}

fn check_bits(n: usize, b: usize) -> Result<()> {
    if n == 0 || n > 12 || b > n {
        return Err(Error::Domain(format!("need 1 ≤ n ≤ 12 and b ≤ n (got n = {n}, b = {b})")));
    }
    Ok(())
}

/// Alice sends the first `b` bits at commit time and the other `n − b` at
/// reveal time.
pub fn prefix(n: usize, b: usize) -> Result<Protocol> {
    check_bits(n, b)?;
    let mut registers = qubits("x", n, Party::Alice);
    registers.extend(qubits("m1_", b, Party::Alice));
    registers.extend(qubits("m2_", n - b, Party::Alice));
    let input: Vec<usize> = (0..n).collect();
    let m1: Vec<usize> = (n..n + b).collect();
    let m2: Vec<usize> = (n + b..2 * n).collect();
    let commit = copy_and_send(&input[..b], &m1);
    let reveal = copy_and_send(&input[b..], &m2);
    let dim = 1usize << n;
    let povm = Povm::with_complement((0..dim).map(|y| basis_projector(dim, y)).collect())?;
    Protocol::new(format!("prefix(n={n},b={b})"), n, registers, input, commit, reveal, povm, uniform(n))
}

/// Alice sends the first `b` bits as a claimed prefix on one `2^b`-level
/// register; at reveal she sends all of `x`, and Bob checks both that he got
/// `x` and that the claimed prefix matches it.
pub fn random_prefix(n: usize, b: usize) -> Result<Protocol> {
    check_bits(n, b)?;
    let mut registers = qubits("x", n, Party::Alice);
    registers.push(Register::new("s", 1 << b, Party::Alice));
    registers.extend(qubits("X", n, Party::Alice));
    let input: Vec<usize> = (0..n).collect();
    let s = n;
    let copies: Vec<usize> = (n + 1..2 * n + 1).collect();
    let mut targets = input[..b].to_vec();
    targets.push(s);
    let commit = vec![Step {
        actor: Party::Alice,
        targets,
        unitary: xor_copy(1 << b),
        send: vec![s],
    }];
    let reveal = copy_and_send(&input, &copies);
    let (sd, xd) = (1usize << b, 1usize << n);
    let labeled = (0..xd)
        .map(|y| {
            let claimed = BitString::new(y, n).map(|x| x.prefix(b).value())?;
            Ok(basis_projector(sd * xd, claimed * xd + y))
        })
        .collect::<Result<Vec<_>>>()?;
    Protocol::new(
        format!("random_prefix(n={n},b={b})"),
        n,
        registers,
        input,
        commit,
        reveal,
        Povm::with_complement(labeled)?,
        uniform(n),
    )
}

/// Nothing is sent at commit time; the reveal sends a copy of `x`.
pub fn nothing(n: usize) -> Result<Protocol> {
    check_bits(n, 0)?;
    let mut registers = qubits("x", n, Party::Alice);
    registers.extend(qubits("X", n, Party::Alice));
    let input: Vec<usize> = (0..n).collect();
    let copies: Vec<usize> = (n..2 * n).collect();
    let reveal = copy_and_send(&input, &copies);
    let dim = 1usize << n;
    let povm = Povm::with_complement((0..dim).map(|y| basis_projector(dim, y)).collect())?;
    Protocol::new(format!("nothing(n={n})"), n, registers, input, vec![], reveal, povm, uniform(n))
}

/// Weight `2^{−εn/2}` that the separation distribution for `x` puts on `x`.
pub fn separation_peak(n: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let peak = (-epsilon * n as f64 / 2.0).exp2();
    if peak > 1.0 {
        return Err(Error::Domain(format!("peak mass {peak} exceeds 1")));
    }
    Ok(peak)
}

/// Distribution over `n`-bit strings with `peak` on `x` and the rest spread
/// evenly.
pub fn separation_row(n: usize, x: usize, peak: f64) -> Vec<f64> {
    let dim = 1usize << n;
    let rest = (1.0 - peak) / (dim - 1) as f64;
    (0..dim).map(|y| if y == x { peak } else { rest }).collect()
}

/// Alice samples `y` from the separation distribution for `x`, keeping a
/// purifying copy, and sends `y`; the reveal sends a copy of `x`.
pub fn separation(n: usize, epsilon: f64) -> Result<Protocol> {
    check_bits(n, 0)?;
    let peak = separation_peak(n, epsilon)?;
    let dim = 1usize << n;
    let mut registers = qubits("x", n, Party::Alice);
    registers.push(Register::new("r", dim, Party::Alice));
    registers.push(Register::new("m", dim, Party::Alice));
    registers.extend(qubits("X", n, Party::Alice));
    let input: Vec<usize> = (0..n).collect();
    let (r, m) = (n, n + 1);
    let copies: Vec<usize> = (n + 2..2 * n + 2).collect();

    let mut controlled = CMatrix::zeros(dim * dim, dim * dim);
    for x in 0..dim {
        let amps: Vec<f64> = separation_row(n, x, peak).iter().map(|p| p.sqrt()).collect();
        controlled
            .view_mut((x * dim, x * dim), (dim, dim))
            .copy_from(&state_preparation(&amps));
    }
    let mut prep_targets = input.clone();
    prep_targets.push(r);
    let commit = vec![
        Step {
            actor: Party::Alice,
            targets: prep_targets,
            unitary: controlled,
            send: vec![],
        },
        Step {
            actor: Party::Alice,
            targets: vec![r, m],
            unitary: xor_copy(dim),
            send: vec![m],
        },
    ];
    let reveal = copy_and_send(&input, &copies);
    let labeled = (0..dim)
        .map(|y| crate::linalg::kron(&crate::linalg::identity(dim), &basis_projector(dim, y)))
        .collect();
    Protocol::new(
        format!("separation(n={n},eps={epsilon})"),
        n,
        registers,
        input,
        commit,
        reveal,
        Povm::with_complement(labeled)?,
        uniform(n),
    )
}

/// The protocols every audit runs on.
pub fn standard() -> Result<Vec<Protocol>> {
    Ok(vec![
        prefix(2, 1)?,
        prefix(3, 1)?,
        prefix(4, 2)?,
        random_prefix(3, 1)?,
        nothing(2)?,
        separation(2, 0.5)?,
    ])
}
