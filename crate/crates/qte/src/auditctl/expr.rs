//! Construction expressions such as `double(conj_parity_pad(n=3))` or
//! `star(otp_accept, triv_reject)`, and attack expressions such as
//! `random_isometry(seed=4, adim=2)`.

use std::fmt;

use crate::attacks::{builtin_attack, cgm_distinguisher, AttackKind};
use crate::channels::Circuit;
use crate::constructions::{
    conj_parity_pad, double_of, id_accept, nfold, otp_accept, parallel_compose, qm_of, qotp_accept, random_aqecm,
    random_qecmr, rev_of, s_oplus, star_of, te_of, triv_reject,
};
use crate::error::{Error, Result};
use crate::qmath::random::rng_from_seed;
use crate::schemes::{AqecmScheme, GroupTable, QecmrScheme, QmScheme};

use super::io::{load_channel, load_scheme};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Str(String),
    Call(Call),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Value,
}

/// `name` or `name(args…)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Arg>,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Call(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                if let Some(n) = &a.name {
                    write!(f, "{n}=")?;
                }
                write!(f, "{}", a.value)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src)))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        self.pos += len;
        Some(rest[..len].to_string())
    }

    fn number(&mut self) -> Result<Option<f64>> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(rest.len());
        if len == 0 || !(rest.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.')) {
            return Ok(None);
        }
        match rest[..len].parse::<f64>() {
            Ok(v) => {
                self.pos += len;
                Ok(Some(v))
            }
            Err(_) => self.err("malformed number"),
        }
    }

    fn string(&mut self) -> Result<Option<String>> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return Ok(None);
        }
        let rest = &self.src[self.pos + 1..];
        match rest.find('"') {
            Some(end) => {
                self.pos += end + 2;
                Ok(Some(rest[..end].to_string()))
            }
            None => self.err("unterminated string"),
        }
    }

    fn value(&mut self) -> Result<Value> {
        if let Some(s) = self.string()? {
            return Ok(Value::Str(s));
        }
        if let Some(x) = self.number()? {
            return Ok(Value::Num(x));
        }
        Ok(Value::Call(self.call()?))
    }

    fn call(&mut self) -> Result<Call> {
        let Some(name) = self.ident() else {
            return self.err("expected a name");
        };
        let mut args = Vec::new();
        if self.eat('(') && !self.eat(')') {
            loop {
                let save = self.pos;
                let named = match self.ident() {
                    Some(n) if self.eat('=') => Some(n),
                    _ => {
                        self.pos = save;
                        None
                    }
                };
                args.push(Arg { name: named, value: self.value()? });
                if self.eat(')') {
                    break;
                }
                if !self.eat(',') {
                    return self.err("expected ',' or ')'");
                }
            }
        }
        Ok(Call { name, args })
    }
}

pub fn parse_expr(src: &str) -> Result<Call> {
    let mut p = Parser { src, pos: 0 };
    let c = p.call()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err("trailing input");
    }
    Ok(c)
}

impl Call {
    /// Argument by name, or else by position among the unnamed ones.
    fn arg(&self, name: &str, pos: usize) -> Option<&Value> {
        self.args
            .iter()
            .find(|a| a.name.as_deref() == Some(name))
            .or_else(|| self.args.iter().filter(|a| a.name.is_none()).nth(pos))
            .map(|a| &a.value)
    }

    fn num(&self, name: &str, pos: usize, default: Option<f64>) -> Result<f64> {
        match self.arg(name, pos) {
            Some(Value::Num(x)) => Ok(*x),
            Some(v) => Err(Error::Parse(format!("{}: argument {name} must be a number, got {v}", self.name))),
            None => default.ok_or_else(|| Error::Parse(format!("{}: missing argument {name}", self.name))),
        }
    }

    fn count(&self, name: &str, pos: usize, default: Option<usize>) -> Result<usize> {
        let x = self.num(name, pos, default.map(|d| d as f64))?;
        if x < 0.0 || x.fract() != 0.0 {
            return Err(Error::Parse(format!("{}: argument {name} must be a non-negative integer", self.name)));
        }
        Ok(x as usize)
    }

    fn sub(&self, pos: usize) -> Result<&Call> {
        match self.args.iter().filter(|a| a.name.is_none()).nth(pos).map(|a| &a.value) {
            Some(Value::Call(c)) => Ok(c),
            _ => Err(Error::Parse(format!("{}: expected a scheme expression as argument {}", self.name, pos + 1))),
        }
    }

    fn text(&self, name: &str, pos: usize) -> Result<String> {
        match self.arg(name, pos) {
            Some(Value::Str(s)) => Ok(s.clone()),
            _ => Err(Error::Parse(format!("{}: expected a quoted string {name}", self.name))),
        }
    }
}

/// Result of a scheme expression.
#[derive(Clone, Debug)]
pub enum SchemeValue {
    Aqecm(AqecmScheme),
    Qecmr(QecmrScheme),
    Qm(QmScheme),
}

impl SchemeValue {
    pub fn kind(&self) -> &'static str {
        match self {
            SchemeValue::Aqecm(_) => "aqecm",
            SchemeValue::Qecmr(_) => "qecmr",
            SchemeValue::Qm(_) => "qm",
        }
    }

    pub fn into_aqecm(self) -> Result<AqecmScheme> {
        match self {
            SchemeValue::Aqecm(s) => Ok(s),
            other => Err(Error::Parse(format!("expected an AQECM scheme, got a {} scheme", other.kind()))),
        }
    }

    pub fn into_qecmr(self) -> Result<QecmrScheme> {
        match self {
            SchemeValue::Qecmr(s) => Ok(s),
            other => Err(Error::Parse(format!("expected a QECMR scheme, got a {} scheme", other.kind()))),
        }
    }
}

pub fn eval_scheme(src: &str, cap: usize) -> Result<SchemeValue> {
    eval_call(&parse_expr(src)?, cap)
}

fn aqecm(c: &Call, pos: usize, cap: usize) -> Result<AqecmScheme> {
    eval_call(c.sub(pos)?, cap)?.into_aqecm()
}

fn eval_call(c: &Call, cap: usize) -> Result<SchemeValue> {
    use SchemeValue::*;
    let q = || c.count("q", 0, Some(2));
    Ok(match c.name.as_str() {
        "triv_reject" => Aqecm(triv_reject(q()?)?),
        "id_accept" => Aqecm(id_accept(q()?)?),
        "otp_accept" => Aqecm(otp_accept(q()?)?),
        "qotp_accept" => Aqecm(qotp_accept(q()?)?),
        "conj_parity_pad" | "cpp" => Aqecm(conj_parity_pad(c.count("n", 0, Some(3))?)?),
        "par" => Aqecm(parallel_compose(&aqecm(c, 0, cap)?, &aqecm(c, 1, cap)?)?),
        "nfold" => Aqecm(nfold(&aqecm(c, 0, cap)?, c.count("n", 1, Some(2))?, cap)?),
        "double" => Aqecm(double_of(&aqecm(c, 0, cap)?)?),
        "star" => {
            let (a, b) = (aqecm(c, 0, cap)?, aqecm(c, 1, cap)?);
            Aqecm(star_of(&a, &b, &GroupTable::cyclic(a.num_messages()))?)
        }
        "s_oplus" => Aqecm(s_oplus(&aqecm(c, 0, cap)?)?),
        "rev" => Qecmr(rev_of(&aqecm(c, 0, cap)?)?),
        "te" => Aqecm(te_of(&eval_call(c.sub(0)?, cap)?.into_qecmr()?, cap)?),
        "qm" => {
            let weak = c.num("weak", 2, Some(0.0))? != 0.0;
            Qm(qm_of(&aqecm(c, 0, cap)?, c.num("gamma", 1, Some(0.0))?, weak, cap)?)
        }
        "random_aqecm" => {
            let mut rng = rng_from_seed(c.count("seed", 0, Some(1))? as u64);
            Aqecm(random_aqecm(&mut rng, c.count("keys", 1, Some(2))?, c.count("q", 2, Some(2))?, c.count("c", 3, Some(2))?)?)
        }
        "random_qecmr" => {
            let mut rng = rng_from_seed(c.count("seed", 0, Some(1))? as u64);
            Qecmr(random_qecmr(
                &mut rng,
                c.count("keys", 1, Some(2))?,
                c.count("q", 2, Some(2))?,
                c.count("c", 3, Some(2))?,
                c.count("r", 4, Some(2))?,
            )?)
        }
        "file" => Aqecm(load_scheme(c.text("path", 0)?)?),
        other => return Err(Error::Parse(format!("unknown construction {other:?}"))),
    })
}

/// Names accepted by [`eval_attack`].
pub const ATTACK_NAMES: &[&str] =
    &["identity", "bitflip", "double_split", "share_split", "full_measure", "random_isometry", "cgm", "file"];

/// Builds the attack named by `src` against `s`.
pub fn eval_attack(src: &str, s: &AqecmScheme, cap: usize) -> Result<Circuit> {
    let c = parse_expr(src)?;
    let cipher = s.cipher_shape();
    let kind = match c.name.as_str() {
        "identity" => AttackKind::Identity,
        "bitflip" => AttackKind::Bitflip,
        "double_split" => AttackKind::DoubleSplit,
        "share_split" => AttackKind::ShareSplit { first: c.count("first", 0, None)? },
        "full_measure" => AttackKind::FullMeasure { wires: None },
        "random_isometry" => {
            AttackKind::RandomIsometry { seed: c.count("seed", 0, Some(1))? as u64, adim: c.count("adim", 1, Some(2))? }
        }
        "cgm" => {
            let d = cgm_distinguisher(s, c.count("m0", 0, Some(0))?, c.count("m1", 1, Some(1))?, cap)?;
            return Ok(d.attack);
        }
        "file" => {
            let k = load_channel(c.text("path", 0)?)?;
            if k.in_shape().dims() != cipher.dims() {
                return Err(Error::DimensionMismatch("attack file does not act on the ciphertext".into()));
            }
            return Circuit::from_kraus(&k).with_in_shape(cipher.clone());
        }
        other => return Err(Error::Parse(format!("unknown attack {other:?}; known: {}", ATTACK_NAMES.join(", ")))),
    };
    builtin_attack(&kind, cipher)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{correctness_gap, encryption_gap};

    #[test]
    fn parses_nested_calls() {
        let c = parse_expr(" double( conj_parity_pad(n=3) ) ").unwrap();
        assert_eq!(c.to_string(), "double(conj_parity_pad(n=3))");
        let c = parse_expr("file(\"a b.json\")").unwrap();
        assert_eq!(c.args[0].value, Value::Str("a b.json".into()));
        assert!(parse_expr("star(a,").is_err());
        assert!(parse_expr("a) b").is_err());
    }

    #[test]
    fn star_expression_is_s_oplus() {
        let e = eval_scheme("star(otp_accept, triv_reject)", 256).unwrap().into_aqecm().unwrap();
        let d = s_oplus(&otp_accept(2).unwrap()).unwrap();
        assert_eq!(e.cipher_shape().dims(), d.cipher_shape().dims());
        assert_eq!(e.keys(), d.keys());
        for k in 0..e.keys().len() {
            let a = e.enc().get(k).unwrap().choi(1024).unwrap();
            let b = d.enc().get(k).unwrap().choi(1024).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
            let a = e.dec().get(k).unwrap().choi(4096).unwrap();
            let b = d.dec().get(k).unwrap().choi(4096).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
        let ge = encryption_gap(&e, 256).unwrap().alpha;
        assert_eq!(ge, encryption_gap(&d, 256).unwrap().alpha);
    }

    #[test]
    fn evaluates_constructions() {
        let s = eval_scheme("par(otp_accept(3), cpp(2))", 256).unwrap().into_aqecm().unwrap();
        assert_eq!(s.num_messages(), 6);
        assert!(correctness_gap(&s, 256).unwrap().eps < 1e-12);
        assert!(matches!(eval_scheme("rev(otp_accept)", 256).unwrap(), SchemeValue::Qecmr(_)));
        assert!(matches!(eval_scheme("te(rev(otp_accept))", 256).unwrap(), SchemeValue::Aqecm(_)));
        assert!(matches!(eval_scheme("qm(otp_accept, gamma=0.1)", 256).unwrap(), SchemeValue::Qm(_)));
        assert!(eval_scheme("te(otp_accept)", 256).is_err());
        assert!(eval_scheme("nope", 256).is_err());
        assert!(eval_scheme("otp_accept(q=1.5)", 256).is_err());
    }

    #[test]
    fn attack_names_resolve() {
        let s = eval_scheme("s_oplus(cpp(2))", 256).unwrap().into_aqecm().unwrap();
        for a in ["identity", "bitflip", "full_measure", "random_isometry(seed=2, adim=3)", "cgm"] {
            eval_attack(a, &s, 256).unwrap();
        }
        assert!(eval_attack("double_split", &s, 256).is_err());
        assert!(eval_attack("teleport", &s, 256).is_err());
    }
}
