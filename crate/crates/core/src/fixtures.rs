//! Reference tuples and tables compiled into the library.

use crate::error::{Error, Result};
use crate::io::parse_tuple;
use crate::tuples::MonodromyTuple;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Tuple,
    Table,
}

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub kind: FixtureKind,
    pub description: &'static str,
    pub text: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "L",
        kind: FixtureKind::Tuple,
        description: "rank one local system (-1,-1,1) on {-1, 1}",
        text: include_str!("../fixtures/L.tuple"),
    },
    Fixture {
        name: "Kummer-1",
        kind: FixtureKind::Tuple,
        description: "Kummer tuple (-1,-1) on {0}",
        text: include_str!("../fixtures/Kummer-1.tuple"),
    },
    Fixture {
        name: "LstarL",
        kind: FixtureKind::Tuple,
        description: "the rank two tuple of L*L on {-2, 0, 2}",
        text: include_str!("../fixtures/LstarL.tuple"),
    },
    Fixture {
        name: "V",
        kind: FixtureKind::Tuple,
        description: "(M1, M2, M3, M4), the tuple of (L*L)*Kummer(-1)",
        text: include_str!("../fixtures/V.tuple"),
    },
    Fixture {
        name: "k3-table",
        kind: FixtureKind::Table,
        description: "point counts N(p) and traces t_p, t_{p^2} for 5 <= p <= 29",
        text: include_str!("../fixtures/k3-table.txt"),
    },
    Fixture {
        name: "alpha-reference",
        kind: FixtureKind::Table,
        description: "reference Frobenius eigenvalues alpha_p = (u + sqrt(d))/p",
        text: include_str!("../fixtures/alpha-reference.txt"),
    },
];

pub fn find(name: &str) -> Result<&'static Fixture> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Format(format!("unknown fixture {name:?}")))
}

pub fn tuple(name: &str) -> Result<MonodromyTuple> {
    let f = find(name)?;
    if f.kind != FixtureKind::Tuple {
        return Err(Error::Format(format!("fixture {name:?} is a table")));
    }
    parse_tuple(f.text)
}

/// Integer rows of a table fixture, header skipped.
pub fn table(name: &str) -> Result<Vec<Vec<i64>>> {
    let f = find(name)?;
    f.text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|w| w.parse::<i64>().map_err(|_| Error::Format(format!("bad table cell {w:?}"))))
                .collect()
        })
        .collect()
}

/// (p, N(p), t_p, t_{p²}).
pub fn k3_table() -> Vec<(u64, u64, i64, i64)> {
    table("k3-table")
        .expect("embedded table")
        .into_iter()
        .map(|r| (r[0] as u64, r[1] as u64, r[2], r[3]))
        .collect()
}

/// (p, u, d) with α_p = (u + √d)/p as tabulated.
pub fn reference_alphas() -> Vec<(u64, i64, i64)> {
    table("alpha-reference").expect("embedded table").into_iter().map(|r| (r[0] as u64, r[1], r[2])).collect()
}
