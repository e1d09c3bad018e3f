//! Jet symbols: the atomic unknowns of every polynomial.
//!
//! A jet is a base scalar decorated with a word of frame-direction
//! derivatives. The word is stored left to right as written, so the leftmost
//! index is applied last: `D4 D3 k4` is `e4(e3(k4))`.
//!
//! The global symbol enumeration (used by the graded-lexicographic monomial
//! order) is the derived `Ord` of [`JetSym`]: first by base in the order the
//! variants of [`Base`] are declared, then by derivative word
//! (shorter words first, then lexicographically). The smallest symbol is the
//! "largest variable" for lex tie-breaking, so `a` leads every univariate
//! polynomial in the ratio symbol.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::AlgebraError;

/// Base scalar of a jet symbol.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Base {
    /// Ratio `k1 / k4` of the endgame.
    A,
    K1,
    K3,
    K4,
    Kappa,
    S1,
    Xi,
    Eta,
    Tau,
    Tau1,
    Tau2,
    Tau3,
    /// Connection coefficient `w_{jk}(e_i)`: `∇_{e_i} e_j` has `w_{jk}(e_i)`
    /// as a coefficient (see the connection table).
    Omega { j: u8, k: u8, i: u8 },
    /// Connection coefficient `phi_i` (`∇_{e_i} e_1 = phi_i e_1 + …`).
    Phi(u8),
    /// Free single-letter variable (`b`..`z`) for auxiliary unknowns.
    Var(char),
}

impl Base {
    pub fn omega(j: u8, k: u8, i: u8) -> Base {
        Base::Omega { j, k, i }
    }

    fn name(&self) -> String {
        match self {
            Base::A => "a".into(),
            Base::K1 => "k1".into(),
            Base::K3 => "k3".into(),
            Base::K4 => "k4".into(),
            Base::Kappa => "kappa".into(),
            Base::S1 => "s1".into(),
            Base::Xi => "xi".into(),
            Base::Eta => "eta".into(),
            Base::Tau => "tau".into(),
            Base::Tau1 => "tau1".into(),
            Base::Tau2 => "tau2".into(),
            Base::Tau3 => "tau3".into(),
            Base::Omega { j, k, i } => format!("w{j}{k}(e{i})"),
            Base::Phi(i) => format!("phi{i}"),
            Base::Var(c) => c.to_string(),
        }
    }

    /// Coarse class used by the rule-orientation well-order: curvature-type
    /// scalars outrank named connection aliases, which outrank raw
    /// connection coefficients.
    fn class(&self) -> u8 {
        match self {
            Base::K1 | Base::K3 | Base::K4 | Base::Kappa | Base::S1 => 3,
            Base::Xi | Base::Eta | Base::Tau | Base::Tau1 | Base::Tau2 | Base::Tau3 => 2,
            Base::Omega { .. } | Base::Phi(_) => 1,
            Base::A | Base::Var(_) => 0,
        }
    }
}

impl FromStr for Base {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::Parse(format!("unknown symbol {s:?}"));
        let b = match s {
            "a" => Base::A,
            "k1" => Base::K1,
            "k3" => Base::K3,
            "k4" => Base::K4,
            "kappa" => Base::Kappa,
            "s1" => Base::S1,
            "xi" => Base::Xi,
            "eta" => Base::Eta,
            "tau" => Base::Tau,
            "tau1" => Base::Tau1,
            "tau2" => Base::Tau2,
            "tau3" => Base::Tau3,
            _ => {
                let bytes = s.as_bytes();
                if let Some(rest) = s.strip_prefix("phi") {
                    let i = single_index(rest).ok_or_else(bad)?;
                    Base::Phi(i)
                } else if bytes.len() == 7
                    && bytes[0] == b'w'
                    && &s[3..5] == "(e"
                    && bytes[6] == b')'
                {
                    let j = single_index(&s[1..2]).ok_or_else(bad)?;
                    let k = single_index(&s[2..3]).ok_or_else(bad)?;
                    let i = single_index(&s[5..6]).ok_or_else(bad)?;
                    Base::Omega { j, k, i }
                } else if bytes.len() == 1 && bytes[0].is_ascii_lowercase() {
                    Base::Var(bytes[0] as char)
                } else {
                    return Err(bad());
                }
            }
        };
        Ok(b)
    }
}

fn single_index(s: &str) -> Option<u8> {
    match s {
        "1" => Some(1),
        "2" => Some(2),
        "3" => Some(3),
        "4" => Some(4),
        _ => None,
    }
}

/// An atomic unknown: base scalar plus derivative word (leftmost applied last).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct JetSym {
    pub base: Base,
    pub word: Vec<u8>,
}

impl JetSym {
    pub fn new(base: Base) -> Self {
        JetSym { base, word: Vec::new() }
    }

    pub fn with_word(base: Base, word: Vec<u8>) -> Self {
        JetSym { base, word }
    }

    pub fn omega(j: u8, k: u8, i: u8) -> Self {
        JetSym::new(Base::omega(j, k, i))
    }

    pub fn var(c: char) -> Self {
        JetSym::new(Base::Var(c))
    }

    /// `e_i` applied to this jet: prepends `i` to the word.
    pub fn prepend(&self, i: u8) -> JetSym {
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.push(i);
        word.extend_from_slice(&self.word);
        JetSym { base: self.base, word }
    }

    /// Derivative order.
    pub fn order(&self) -> usize {
        self.word.len()
    }

    /// True when the word is non-increasing left to right, i.e. sorted
    /// ascending in application order (innermost first). This is the
    /// canonical jet order after explicit commutation.
    pub fn is_canonical(&self) -> bool {
        self.word.windows(2).all(|w| w[0] >= w[1])
    }

    /// Whether `pattern` is this jet with a (possibly empty) derivative
    /// prefix; returns the prefix.
    pub fn strip_pattern(&self, pattern: &JetSym) -> Option<Vec<u8>> {
        if self.base != pattern.base || self.word.len() < pattern.word.len() {
            return None;
        }
        let cut = self.word.len() - pattern.word.len();
        if self.word[cut..] == pattern.word[..] {
            Some(self.word[..cut].to_vec())
        } else {
            None
        }
    }

    /// Well-order key for rule orientation: derivative order first, then the
    /// flow direction (words ending outermost in `e4` outrank transversal
    /// words), then base class, then the symbol itself.
    pub fn rank(&self) -> (usize, bool, u8) {
        let flow = self.word.first() == Some(&4);
        (self.order(), flow, self.base.class())
    }
}

impl PartialOrd for JetSym {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JetSym {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.base
            .cmp(&other.base)
            .then_with(|| self.word.len().cmp(&other.word.len()))
            .then_with(|| self.word.cmp(&other.word))
    }
}

impl fmt::Display for JetSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.word {
            write!(f, "D{i} ")?;
        }
        write!(f, "{}", self.base.name())
    }
}

impl fmt::Debug for JetSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for JetSym {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut word = Vec::new();
        let mut parts = s.split_whitespace().peekable();
        let mut base = None;
        while let Some(p) = parts.next() {
            if parts.peek().is_some() {
                let idx = p
                    .strip_prefix('D')
                    .and_then(single_index)
                    .ok_or_else(|| AlgebraError::Parse(format!("bad derivative {p:?} in {s:?}")))?;
                word.push(idx);
            } else {
                base = Some(p.parse::<Base>()?);
            }
        }
        let base = base.ok_or_else(|| AlgebraError::Parse(format!("empty symbol {s:?}")))?;
        Ok(JetSym { base, word })
    }
}

impl Serialize for JetSym {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for JetSym {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand constructors for the named scalars.
pub mod sym {
    use super::{Base, JetSym};

    pub fn a() -> JetSym {
        JetSym::new(Base::A)
    }
    pub fn k1() -> JetSym {
        JetSym::new(Base::K1)
    }
    pub fn k3() -> JetSym {
        JetSym::new(Base::K3)
    }
    pub fn k4() -> JetSym {
        JetSym::new(Base::K4)
    }
    pub fn kappa() -> JetSym {
        JetSym::new(Base::Kappa)
    }
    pub fn s1() -> JetSym {
        JetSym::new(Base::S1)
    }
    pub fn xi() -> JetSym {
        JetSym::new(Base::Xi)
    }
    pub fn eta() -> JetSym {
        JetSym::new(Base::Eta)
    }
    pub fn tau() -> JetSym {
        JetSym::new(Base::Tau)
    }
    pub fn w(j: u8, k: u8, i: u8) -> JetSym {
        JetSym::omega(j, k, i)
    }
    pub fn phi(i: u8) -> JetSym {
        JetSym::new(Base::Phi(i))
    }
    /// `D_word base`, word written left to right (leftmost applied last).
    pub fn d(word: &[u8], base: JetSym) -> JetSym {
        let mut w = word.to_vec();
        w.extend_from_slice(&base.word);
        JetSym::with_word(base.base, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for s in ["D4 D4 k4", "w34(e3)", "D3 w14(e2)", "phi2", "kappa", "a", "x", "tau3"] {
            let j: JetSym = s.parse().unwrap();
            assert_eq!(j.to_string(), s);
        }
        assert!("D5 k4".parse::<JetSym>().is_err());
        assert!("w3(e3)".parse::<JetSym>().is_err());
        assert!("foo".parse::<JetSym>().is_err());
    }

    #[test]
    fn prepend_puts_index_leftmost() {
        let j: JetSym = "D3 k4".parse().unwrap();
        assert_eq!(j.prepend(4).to_string(), "D4 D3 k4");
        assert!(j.prepend(4).is_canonical());
        assert!(!j.prepend(1).prepend(4).prepend(2).is_canonical());
    }

    #[test]
    fn pattern_prefix() {
        let j: JetSym = "D4 D2 k1".parse().unwrap();
        let p: JetSym = "D2 k1".parse().unwrap();
        assert_eq!(j.strip_pattern(&p), Some(vec![4]));
        assert_eq!(j.strip_pattern(&"D4 k1".parse().unwrap()), None);
    }
}
