//! Grammar:
//!
//! ```text
//! spec    := "sigma:" INT | "pmean:" REAL | "product:(" factor ("," factor)* ")"
//! factor  := spec "*" REAL
//! ```

use super::{CurvatureError, Family, Result};

pub(super) fn parse_family(text: &str) -> Result<Family> {
    let mut p = Parser { src: text, pos: 0 };
    let fam = p.family()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("trailing input"));
    }
    Ok(fam)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> CurvatureError {
        CurvatureError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn number(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+')))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a number"));
        }
        let tok = &self.rest()[..len];
        self.pos += len;
        Ok(tok)
    }

    fn family(&mut self) -> Result<Family> {
        if self.eat("sigma:") {
            let start = self.pos;
            let tok = self.number()?;
            let m = tok.parse::<usize>().map_err(|_| CurvatureError::Parse {
                pos: start,
                msg: format!("`{tok}` is not a nonnegative integer"),
            })?;
            Ok(Family::SigmaM(m))
        } else if self.eat("pmean:") {
            let k = self.real()?;
            Ok(Family::PowerMean(k))
        } else if self.eat("product:") {
            self.expect("(")?;
            let mut factors = Vec::new();
            loop {
                let fam = self.family()?;
                self.expect("*")?;
                let w = self.real()?;
                factors.push((fam, w));
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
            Ok(Family::Product(factors))
        } else {
            Err(self.error("expected `sigma:`, `pmean:` or `product:`"))
        }
    }

    fn real(&mut self) -> Result<f64> {
        let start = self.pos;
        let tok = self.number()?;
        tok.parse::<f64>().map_err(|_| CurvatureError::Parse {
            pos: start,
            msg: format!("`{tok}` is not a number"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        assert_eq!(parse_family("sigma:2").unwrap(), Family::SigmaM(2));
        assert_eq!(parse_family("pmean:0.5").unwrap(), Family::PowerMean(0.5));
        assert_eq!(
            parse_family("product:(sigma:1*0.25, product:(pmean:2*1)*0.75)").unwrap(),
            Family::Product(vec![
                (Family::SigmaM(1), 0.25),
                (Family::Product(vec![(Family::PowerMean(2.0), 1.0)]), 0.75),
            ])
        );
    }

    #[test]
    fn display_round_trips() {
        for text in ["sigma:3", "pmean:1.5", "product:(sigma:1*0.5,pmean:2*0.5)"] {
            assert_eq!(parse_family(text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn reports_position() {
        match parse_family("sigma:x") {
            Err(CurvatureError::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_family("gauss:1").is_err());
        assert!(parse_family("product:(sigma:1)").is_err());
        assert!(parse_family("sigma:1 extra").is_err());
    }
}
