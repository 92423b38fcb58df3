//! Canonical JSON serialization for certificates and reports.
//!
//! One fixed field order per object, compact separators, and integers
//! rendered as arbitrary-precision JSON numbers (never floats), so that any
//! output parses and re-serializes to itself byte for byte. Construction
//! certificates embed the full expansion including its state trace, so a
//! second implementation can replay every check without trusting this one.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde_json::{Map, Number, Value};

use crate::census::{CensusReport, Counterexample};
use crate::cf::SurdExpansion;
use crate::congruence::{Check, ConstructionCertificate};
use crate::friesen::{
    EnumerationOutcome, FriesenFamily, PalindromeSeq, ParityCase, ParityCheck, ParityWitness,
};
use crate::rank::{RankBoundCertificate, UValue};

fn decimal(digits: String) -> Value {
    debug_assert!(digits
        .trim_start_matches('-')
        .bytes()
        .all(|b| b.is_ascii_digit()));
    Value::Number(Number::from_string_unchecked(digits))
}

pub fn uint(n: &BigUint) -> Value {
    decimal(n.to_string())
}

pub fn int(n: &BigInt) -> Value {
    decimal(n.to_string())
}

fn obj<const N: usize>(entries: [(&str, Value); N]) -> Value {
    let mut map = Map::with_capacity(N);
    for (key, value) in entries {
        map.insert(key.to_string(), value);
    }
    Value::Object(map)
}

/// Exact rational as `{"numer": .., "denom": ..}` in lowest terms.
pub fn rational(r: &BigRational) -> Value {
    obj([("numer", int(r.numer())), ("denom", int(r.denom()))])
}

/// `{"D": .., "a0": .., "period": [..], "k": ..}`
pub fn expansion(e: &SurdExpansion) -> Value {
    obj([
        ("D", uint(&e.d)),
        ("a0", uint(&e.a0)),
        ("period", Value::Array(e.period.iter().map(uint).collect())),
        ("k", Value::from(e.k() as u64)),
    ])
}

/// Expansion plus its `[m_i, d_i]` state trace, for replayable certificates.
pub fn expansion_with_trace(e: &SurdExpansion) -> Value {
    let Value::Object(mut map) = expansion(e) else {
        unreachable!()
    };
    map.insert(
        "state_trace".to_string(),
        Value::Array(
            e.state_trace
                .iter()
                .map(|(m, d)| Value::Array(vec![uint(m), uint(d)]))
                .collect(),
        ),
    );
    Value::Object(map)
}

pub fn family(f: &FriesenFamily) -> Value {
    obj([
        ("alpha", rational(&f.alpha)),
        ("beta", rational(&f.beta)),
        ("gamma", rational(&f.gamma)),
        ("q_km1", uint(&f.q_km1)),
        ("q_km2", uint(&f.q_km2)),
        (
            "parity_case",
            Value::String(
                match f.parity_case {
                    ParityCase::QOdd => "q_odd",
                    ParityCase::QEven => "q_even",
                }
                .to_string(),
            ),
        ),
        ("k", Value::from(f.k as u64)),
        ("discriminant", rational(&f.discriminant())),
    ])
}

pub fn parity_check(c: &ParityCheck) -> Value {
    obj([
        ("satisfiable", Value::Bool(c.satisfiable)),
        ("q_km1", uint(&c.q_km1)),
        ("q_km2", uint(&c.q_km2)),
        ("quotient", uint(&c.quotient)),
        (
            "witness",
            match c.witness {
                Some(ParityWitness::QKm2Even) => Value::String("q_km2_even".to_string()),
                Some(ParityWitness::QuotientEven) => Value::String("quotient_even".to_string()),
                None => Value::Null,
            },
        ),
    ])
}

fn palindrome(p: &PalindromeSeq) -> Value {
    Value::Array(p.entries().iter().map(uint).collect())
}

fn check(c: &Check) -> Value {
    obj([
        ("name", Value::String(c.name.to_string())),
        ("passed", Value::Bool(c.passed)),
        ("detail", Value::String(c.detail.clone())),
    ])
}

/// Field order fixed: target, coefficients, family, b, D, expansion, checks.
pub fn certificate(c: &ConstructionCertificate) -> Value {
    obj([
        (
            "target",
            obj([
                ("m", int(&c.target_m)),
                ("n", uint(&c.target_n)),
                ("k", Value::from(c.target_k as u64)),
            ]),
        ),
        ("coefficients", palindrome(&c.coefficients)),
        ("family", family(&c.family)),
        ("b", int(&c.b)),
        ("D", uint(&c.d)),
        ("expansion", expansion_with_trace(&c.expansion)),
        ("checks", Value::Array(c.checks.iter().map(check).collect())),
    ])
}

pub fn rank_certificate(r: &RankBoundCertificate) -> Value {
    let u = match &r.u {
        UValue::MaxOddIndexed(u) => obj([
            ("form", Value::String("integer".to_string())),
            ("value", uint(u)),
        ]),
        UValue::SqrtOfD(d) => obj([
            ("form", Value::String("sqrt_of_d".to_string())),
            ("radicand", uint(d)),
        ]),
    };
    obj([
        ("D", uint(&r.d)),
        ("k", Value::from(r.k as u64)),
        ("u", u),
        ("classical_bound", uint(&r.classical_bound)),
        (
            "general_bound",
            r.general_bound.as_ref().map(uint).unwrap_or(Value::Null),
        ),
        ("u_threshold_met", Value::Bool(r.u_threshold_met)),
    ])
}

fn counterexample(c: &Counterexample) -> Value {
    obj([
        ("d", Value::from(c.d)),
        ("claim", Value::String(c.claim.to_string())),
        ("detail", Value::String(c.detail.clone())),
    ])
}

pub fn census_report(r: &CensusReport) -> Value {
    obj([
        (
            "range",
            obj([("lo", Value::from(r.lo)), ("hi", Value::from(r.hi))]),
        ),
        (
            "period_counts",
            Value::Array(
                r.period_counts
                    .iter()
                    .map(|(k, c)| Value::Array(vec![Value::from(*k as u64), Value::from(*c)]))
                    .collect(),
            ),
        ),
        (
            "counterexamples",
            Value::Array(r.counterexamples.iter().map(counterexample).collect()),
        ),
        (
            "residue_coverage",
            Value::Array(
                r.residue_coverage
                    .iter()
                    .map(|(k, n, set)| {
                        obj([
                            ("k", Value::from(*k)),
                            ("n", Value::from(*n)),
                            (
                                "residues",
                                Value::Array(set.iter().map(|&x| Value::from(x)).collect()),
                            ),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
}

/// Family-enumeration output: palindrome, solvability, family, members,
/// skipped candidates with reasons.
pub fn enumeration(
    p: &PalindromeSeq,
    parity: &ParityCheck,
    f: &FriesenFamily,
    outcome: &EnumerationOutcome,
) -> Value {
    obj([
        ("palindrome", palindrome(p)),
        ("k", Value::from(p.k() as u64)),
        ("parity", parity_check(parity)),
        ("family", family(f)),
        (
            "members",
            Value::Array(
                outcome
                    .emitted
                    .iter()
                    .map(|m| {
                        obj([
                            ("b", int(&m.b)),
                            ("D", uint(&m.d)),
                            (
                                "squarefree",
                                m.squarefree.map(Value::Bool).unwrap_or(Value::Null),
                            ),
                            ("expansion", expansion(&m.expansion)),
                        ])
                    })
                    .collect(),
            ),
        ),
        (
            "skipped",
            Value::Array(
                outcome
                    .skipped
                    .iter()
                    .map(|s| {
                        obj([
                            ("b", int(&s.b)),
                            ("reason", Value::String(s.reason.to_string())),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
}

/// Structured error for the error stream.
pub fn error(kind: &str, message: &str) -> Value {
    obj([(
        "error",
        obj([
            ("kind", Value::String(kind.to_string())),
            ("message", Value::String(message.to_string())),
        ]),
    )])
}

/// The one canonical rendering: compact, fixed field order.
pub fn to_canonical_string(v: &Value) -> String {
    v.to_string()
}
