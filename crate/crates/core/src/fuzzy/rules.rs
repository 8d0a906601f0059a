use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::membership::Term;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule base is empty")]
    Empty,
}

/// Input variables of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Input {
    /// Arousal
    A,
    /// Valence
    V,
    /// Dominance
    D,
}

impl Input {
    pub const ALL: [Input; 3] = [Input::A, Input::V, Input::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Input::A => "A",
            Input::V => "V",
            Input::D => "D",
        }
    }
}

impl FromStr for Input {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" => Ok(Input::A),
            "V" => Ok(Input::V),
            "D" => Ok(Input::D),
            other => Err(format!("unknown input variable {other:?}")),
        }
    }
}

/// `if <conjunction of literals> then DS = <term>`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub antecedent: Vec<(Input, Term)>,
    pub consequent: Term,
}

impl FuzzyRule {
    pub fn new(antecedent: Vec<(Input, Term)>, consequent: Term) -> Result<Self, String> {
        if antecedent.is_empty() || antecedent.len() > 3 {
            return Err(format!(
                "a rule needs 1 to 3 antecedent literals, got {}",
                antecedent.len()
            ));
        }
        for (i, (var, _)) in antecedent.iter().enumerate() {
            if antecedent[..i].iter().any(|(v, _)| v == var) {
                return Err(format!("variable {} appears twice", var.name()));
            }
        }
        Ok(Self {
            antecedent,
            consequent,
        })
    }
}

impl fmt::Display for FuzzyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> = self
            .antecedent
            .iter()
            .map(|(v, t)| format!("{}={}", v.name(), t.name()))
            .collect();
        write!(f, "{} -> DS={}", lits.join(" & "), self.consequent.name())
    }
}

impl FromStr for FuzzyRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lhs, rhs) = s
            .split_once("->")
            .ok_or_else(|| "expected `<literals> -> DS=<term>`".to_string())?;
        let (out, term) = rhs
            .split_once('=')
            .ok_or_else(|| "consequent must read DS=<term>".to_string())?;
        if out.trim() != "DS" {
            return Err(format!("consequent must target DS, not {:?}", out.trim()));
        }
        let consequent: Term = term.parse()?;
        let antecedent = lhs
            .split('&')
            .map(|lit| {
                let (var, term) = lit
                    .split_once('=')
                    .ok_or_else(|| format!("malformed literal {:?}", lit.trim()))?;
                Ok((var.parse()?, term.parse()?))
            })
            .collect::<Result<Vec<_>, String>>()?;
        FuzzyRule::new(antecedent, consequent)
    }
}

/// Ordered rule list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleBase {
    rules: Vec<FuzzyRule>,
}

impl RuleBase {
    /// The nine drowsiness rules. The first one reads `A=M -> DS=S`.
    pub fn standard() -> Self {
        const TEXT: &str = "\
A=M -> DS=S
A=S & V=S & D=S -> DS=S
A=L & V=L & D=L -> DS=L
A=L & V=S & D=M -> DS=S
A=L & V=S & D=L -> DS=S
A=S & V=M & D=M -> DS=S
A=S & V=L & D=M -> DS=M
A=S & V=M & D=L -> DS=S
A=S & V=L & D=L -> DS=M
";
        // compiled-in text is known to parse
        Self::parse(TEXT).unwrap()
    }

    /// One rule per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let rule = line.parse().map_err(|message| RuleError::Syntax {
                line: i + 1,
                message,
            })?;
            rules.push(rule);
        }
        if rules.is_empty() {
            return Err(RuleError::Empty);
        }
        Ok(Self { rules })
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl Default for RuleBase {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_has_nine_rules() {
        let rb = RuleBase::standard();
        assert_eq!(rb.len(), 9);
        assert_eq!(rb.rules()[0].antecedent, vec![(Input::A, Term::M)]);
        assert_eq!(rb.rules()[0].consequent, Term::S);
        assert_eq!(rb.rules()[2].to_string(), "A=L & V=L & D=L -> DS=L");
        assert_eq!(rb.rules()[8].consequent, Term::M);
        let ds_m = rb
            .rules()
            .iter()
            .filter(|r| r.consequent == Term::M)
            .count();
        let ds_l = rb
            .rules()
            .iter()
            .filter(|r| r.consequent == Term::L)
            .count();
        assert_eq!((ds_m, ds_l), (2, 1));
    }

    #[test]
    fn display_round_trips() {
        for r in RuleBase::standard().rules() {
            assert_eq!(&r.to_string().parse::<FuzzyRule>().unwrap(), r);
        }
    }

    #[test]
    fn rejects_bad_rules() {
        assert!("A=S & A=M -> DS=S".parse::<FuzzyRule>().is_err());
        assert!("A=M -> D=S".parse::<FuzzyRule>().is_err());
        assert!("A=X -> DS=S".parse::<FuzzyRule>().is_err());
        assert!("A=S".parse::<FuzzyRule>().is_err());
        assert!(matches!(
            RuleBase::parse("# nothing\n\n"),
            Err(RuleError::Empty)
        ));
        assert!(matches!(
            RuleBase::parse("A=S -> DS=S\nbogus\n"),
            Err(RuleError::Syntax { line: 2, .. })
        ));
    }
}
