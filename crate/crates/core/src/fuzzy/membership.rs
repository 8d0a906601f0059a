use serde::{Deserialize, Serialize};

/// Linguistic terms shared by every variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    S,
    M,
    L,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::S, Term::M, Term::L];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Term::S => "S",
            Term::M => "M",
            Term::L => "L",
        }
    }
}

impl std::str::FromStr for Term {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "S" | "s" => Ok(Term::S),
            "M" | "m" => Ok(Term::M),
            "L" | "l" => Ok(Term::L),
            other => Err(format!("unknown term {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Triangle,
    /// Saturates at 1 for every x at or below the apex.
    LeftShoulder,
    /// Saturates at 1 for every x at or above the apex.
    RightShoulder,
}

/// Triangular membership function with feet `a`, `c` and apex `b`.
///
/// A plain triangle with `a == b` behaves as a left shoulder, and one with
/// `b == c` as a right shoulder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipFunction {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub shape: Shape,
}

impl MembershipFunction {
    pub fn triangle(a: f64, b: f64, c: f64) -> Self {
        debug_assert!(a <= b && b <= c, "breakpoints out of order: {a} {b} {c}");
        Self {
            a,
            b,
            c,
            shape: Shape::Triangle,
        }
    }

    pub fn left_shoulder(a: f64, b: f64, c: f64) -> Self {
        Self {
            shape: Shape::LeftShoulder,
            ..Self::triangle(a, b, c)
        }
    }

    pub fn right_shoulder(a: f64, b: f64, c: f64) -> Self {
        Self {
            shape: Shape::RightShoulder,
            ..Self::triangle(a, b, c)
        }
    }

    fn saturates_left(&self) -> bool {
        self.shape == Shape::LeftShoulder || self.a == self.b
    }

    fn saturates_right(&self) -> bool {
        self.shape == Shape::RightShoulder || self.b == self.c
    }

    /// Degree of membership of `x`, always in `[0, 1]`.
    pub fn degree(&self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.0;
        }
        let Self { a, b, c, .. } = *self;
        let d = if x == b {
            1.0
        } else if x < b {
            if self.saturates_left() {
                1.0
            } else if x <= a {
                0.0
            } else {
                (x - a) / (b - a)
            }
        } else if self.saturates_right() {
            1.0
        } else if x >= c {
            0.0
        } else {
            (c - x) / (c - b)
        };
        d.clamp(0.0, 1.0)
    }
}
