use super::{RadialWeight, WeightFamily};
use crate::error::{Error, Result};
use std::path::Path;
use std::str::FromStr;

/// Weight specification strings:
///
/// ```text
///   constant
///   standard:beta=2
///   exp:alpha=1,l=1,beta=1
///   lograpid:alpha=2
///   tabulated:file=path/to/tails.csv
/// ```
///
/// Parameters may appear in any order; each family requires exactly its own
/// set. Errors carry the byte offset of the offending token.
impl FromStr for RadialWeight {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.find(':') {
            Some(i) => (&spec[..i], Some((&spec[i + 1..], i + 1))),
            None => (spec, None),
        };
        match name {
            "constant" => {
                if let Some((args, pos)) = rest {
                    if !args.is_empty() {
                        return Err(err(pos, "constant takes no parameters"));
                    }
                }
                Ok(RadialWeight::constant())
            }
            "standard" => {
                let params = parse_params(rest, &["beta"])?;
                RadialWeight::standard(params[0])
            }
            "exp" => {
                let params = parse_params(rest, &["alpha", "l", "beta"])?;
                RadialWeight::exponential(params[0], params[1], params[2])
            }
            "lograpid" => {
                let params = parse_params(rest, &["alpha"])?;
                RadialWeight::log_rapid(params[0])
            }
            "tabulated" => {
                let (args, pos) = rest.ok_or_else(|| err(0, "tabulated needs file=PATH"))?;
                let (key, value, vpos) = split_kv(args, pos)?;
                if key != "file" {
                    return Err(err(pos, "tabulated takes a single parameter: file"));
                }
                read_tail_table(Path::new(value)).map_err(|e| match e {
                    Error::BadTable(m) => err(vpos, &m),
                    other => other,
                })
            }
            "" => Err(err(0, "empty weight specification")),
            other => Err(err(
                0,
                &format!("unknown family {other:?}; expected constant, standard, exp, lograpid, or tabulated"),
            )),
        }
    }
}

impl RadialWeight {
    /// Canonical spec string that parses back to an equivalent weight
    /// (tabulated weights keep only their label; the table itself does not
    /// round-trip through a string).
    pub fn spec_string(&self) -> String {
        self.label().to_string()
    }
}

fn err(position: usize, message: &str) -> Error {
    Error::SpecParse {
        position,
        message: message.to_string(),
    }
}

/// key=value with both parts nonempty; returns the value's byte offset.
fn split_kv(token: &str, pos: usize) -> Result<(&str, &str, usize)> {
    let eq = token
        .find('=')
        .ok_or_else(|| err(pos, &format!("expected key=value, got {token:?}")))?;
    let key = &token[..eq];
    let value = &token[eq + 1..];
    if key.is_empty() {
        return Err(err(pos, "empty parameter name"));
    }
    if value.is_empty() {
        return Err(err(pos + eq + 1, &format!("parameter {key:?} has no value")));
    }
    Ok((key, value, pos + eq + 1))
}

/// Comma-separated key=value list; every name in `required` exactly once.
fn parse_params(rest: Option<(&str, usize)>, required: &[&str]) -> Result<Vec<f64>> {
    let (args, base) = rest.ok_or_else(|| {
        err(
            0,
            &format!("missing parameters; expected {}", required.join(", ")),
        )
    })?;
    let mut out = vec![f64::NAN; required.len()];
    let mut seen = vec![false; required.len()];
    let mut pos = base;
    for token in args.split(',') {
        if token.is_empty() {
            return Err(err(pos, "empty parameter"));
        }
        let (key, value, vpos) = split_kv(token, pos)?;
        let idx = required
            .iter()
            .position(|r| *r == key)
            .ok_or_else(|| err(pos, &format!("unknown parameter {key:?}")))?;
        if seen[idx] {
            return Err(err(pos, &format!("duplicate parameter {key:?}")));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| err(vpos, &format!("cannot parse {value:?} as a number")))?;
        out[idx] = v;
        seen[idx] = true;
        pos += token.len() + 1;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(err(base, &format!("missing parameter {:?}", required[i])));
    }
    Ok(out)
}

/// Read a tabulated weight from CSV rows `r,tail`. Blank lines and lines
/// starting with `#` are skipped; a leading non-numeric row is treated as a
/// header.
pub fn read_tail_table(path: &Path) -> Result<RadialWeight> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadTable(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::BadTable(format!(
                    "{}:{}: expected two comma-separated fields",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(r), Ok(t)) => rows.push((r, t)),
            _ if rows.is_empty() => continue, // header row
            _ => {
                return Err(Error::BadTable(format!(
                    "{}:{}: cannot parse {a:?},{b:?} as numbers",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    let table = super::TailTable::new(rows)
        .map_err(|e| match e {
            Error::BadTable(m) => Error::BadTable(format!("{}: {m}", path.display())),
            other => other,
        })?;
    let mut w = RadialWeight::new(
        WeightFamily::Tabulated(table),
        format!("tabulated:file={}", path.display()),
    );
    w.label = format!("tabulated:file={}", path.display());
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn parses_every_builtin_family() {
        let w: RadialWeight = "constant".parse().unwrap();
        assert_eq!(w.label(), "constant");
        let w: RadialWeight = "standard:beta=2".parse().unwrap();
        assert!((w.moment(3.0).unwrap() - 1.0 / 6.0).abs() < 1e-14);
        let w: RadialWeight = "exp:alpha=1,l=1,beta=1".parse().unwrap();
        assert!(w.tail(0.5).unwrap() > 0.0);
        let w: RadialWeight = "exp:beta=1,alpha=1,l=1".parse().unwrap();
        assert_eq!(w.label(), "exp:alpha=1,l=1,beta=1");
        let w: RadialWeight = "lograpid:alpha=2".parse().unwrap();
        assert!(w.tail(0.0).unwrap() > 0.0);
    }

    #[test]
    fn spec_strings_round_trip() {
        for spec in [
            "constant",
            "standard:beta=2",
            "standard:beta=0.5",
            "exp:alpha=1,l=1,beta=1",
            "exp:alpha=2,l=1.5,beta=0.5",
            "lograpid:alpha=2",
        ] {
            let w: RadialWeight = spec.parse().unwrap();
            assert_eq!(w.spec_string(), spec);
            let again: RadialWeight = w.spec_string().parse().unwrap();
            assert_eq!(again.spec_string(), spec);
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        match "standard".parse::<RadialWeight>() {
            Err(Error::SpecParse { message, .. }) => assert!(message.contains("beta")),
            other => panic!("{other:?}"),
        }
        match "standard:beta=abc".parse::<RadialWeight>() {
            Err(Error::SpecParse { position, .. }) => assert_eq!(position, 14),
            other => panic!("{other:?}"),
        }
        match "exp:alpha=1,l=1".parse::<RadialWeight>() {
            Err(Error::SpecParse { message, .. }) => assert!(message.contains("beta")),
            other => panic!("{other:?}"),
        }
        match "exp:alpha=1,alpha=2,l=1,beta=1".parse::<RadialWeight>() {
            Err(Error::SpecParse { message, .. }) => assert!(message.contains("duplicate")),
            other => panic!("{other:?}"),
        }
        match "gaussian:sigma=1".parse::<RadialWeight>() {
            Err(Error::SpecParse { message, .. }) => assert!(message.contains("unknown family")),
            other => panic!("{other:?}"),
        }
        assert!("standard:gamma=2".parse::<RadialWeight>().is_err());
    }

    #[test]
    fn reads_csv_tables_with_headers_and_comments() {
        let dir = std::env::temp_dir().join("blochfrac-table-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tails.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# sampled tails").unwrap();
        writeln!(f, "r,tail").unwrap();
        writeln!(f, "0.0,1.0").unwrap();
        writeln!(f).unwrap();
        writeln!(f, "0.5, 0.5").unwrap();
        writeln!(f, "0.9,0.1").unwrap();
        drop(f);
        let w = read_tail_table(&path).unwrap();
        assert!((w.tail(0.25).unwrap() - 0.75).abs() < 1e-12);
        assert!(w.extrapolation_start() == Some(0.9));
        assert!(!w.has_density());
        assert!(w.density(0.5).is_none());
        // Moments still work through the tail form.
        assert!(w.moment(3.0).unwrap() > 0.0);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn rejects_malformed_csv() {
        let dir = std::env::temp_dir().join("blochfrac-table-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "0.0,1.0\n0.5\n").unwrap();
        match read_tail_table(&path) {
            Err(Error::BadTable(m)) => assert!(m.contains(":2:")),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "0.0,1.0\n0.5,oops\n").unwrap();
        assert!(read_tail_table(&path).is_err());
        std::fs::remove_file(&path).unwrap();
    }
}
