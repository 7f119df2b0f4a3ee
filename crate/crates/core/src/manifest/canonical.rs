//! Canonical manifest bytes.
//!
//! The encoding is a JSON subset: one object, keys in ascending byte order,
//! no whitespace, integers in minimal decimal form, strings whose only
//! escapes are `\"` and `\\`. The parser accepts any whitespace and key
//! order syntactically, then insists that re-encoding the result reproduces
//! the input exactly.

use std::collections::BTreeMap;

use super::{
    ImageDigest, ManifestError, RealismManifest, ScoresMilli, ALGO_HASH, ALGO_SCORING, ALGO_SIG,
    MANIFEST_VERSION,
};
use crate::identity::{DeviceId, Location};

/// The exact byte string a device signs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalBytes(Vec<u8>);

impl CanonicalBytes {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }
}

impl AsRef<[u8]> for CanonicalBytes {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

struct Writer {
    out: Vec<u8>,
    needs_comma: Vec<bool>,
}

impl Writer {
    fn new() -> Self {
        Self {
            out: Vec::with_capacity(320),
            needs_comma: Vec::new(),
        }
    }

    fn key(&mut self, key: &str) {
        if let Some(comma) = self.needs_comma.last_mut() {
            if *comma {
                self.out.push(b',');
            }
            *comma = true;
        }
        self.string(key);
        self.out.push(b':');
    }

    fn open(&mut self) {
        self.out.push(b'{');
        self.needs_comma.push(false);
    }

    fn close(&mut self) {
        self.out.push(b'}');
        self.needs_comma.pop();
    }

    fn string(&mut self, s: &str) {
        self.out.push(b'"');
        for &b in s.as_bytes() {
            if b == b'"' || b == b'\\' {
                self.out.push(b'\\');
            }
            self.out.push(b);
        }
        self.out.push(b'"');
    }

    fn int(&mut self, v: impl Into<i64>) {
        self.out.extend_from_slice(v.into().to_string().as_bytes());
    }
}

pub fn canonical_encode(m: &RealismManifest) -> Result<CanonicalBytes, ManifestError> {
    m.validate()?;
    let mut w = Writer::new();
    w.open();

    w.key("algos");
    w.open();
    w.key("hash");
    w.string(ALGO_HASH);
    w.key("scoring");
    w.string(ALGO_SCORING);
    w.key("sig");
    w.string(ALGO_SIG);
    w.close();

    w.key("device_id");
    w.string(m.device_id.as_str());
    w.key("image_sha256");
    w.string(m.image_sha256.as_str());

    if let Some(loc) = m.location {
        w.key("location");
        w.open();
        w.key("lat_microdeg");
        w.int(loc.lat_microdeg());
        w.key("lon_microdeg");
        w.int(loc.lon_microdeg());
        w.close();
    }

    w.key("scores");
    w.open();
    for (name, value) in m.scores.entries() {
        w.key(name);
        w.int(value);
    }
    w.close();

    w.key("timestamp_unix");
    w.int(m.timestamp_unix);
    w.key("version");
    w.int(MANIFEST_VERSION);
    w.close();
    Ok(CanonicalBytes(w.out))
}

/// Strict parse: only the canonical encoding of a valid manifest is
/// accepted.
pub fn parse_manifest(bytes: &[u8]) -> Result<RealismManifest, ManifestError> {
    let mut parser = Parser { src: bytes, pos: 0 };
    parser.skip_ws();
    let value = parser.value(0)?;
    parser.skip_ws();
    if parser.pos != bytes.len() {
        return Err(parser.error("trailing data after object"));
    }
    let manifest = build(value)?;
    if canonical_encode(&manifest)?.as_bytes() != bytes {
        return Err(ManifestError::NonCanonical);
    }
    Ok(manifest)
}

#[derive(Debug)]
enum Value {
    Object(BTreeMap<String, Value>),
    String(String),
    /// Decimal digits kept as text; range checks happen per field.
    Integer(String),
}

const MAX_DEPTH: usize = 4;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ManifestError {
        ManifestError::Syntax {
            offset: self.pos,
            msg: msg.to_owned(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ManifestError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", byte as char)))
        }
    }

    fn value(&mut self, depth: usize) -> Result<Value, ManifestError> {
        match self.peek() {
            Some(b'{') if depth < MAX_DEPTH => self.object(depth + 1),
            Some(b'{') => Err(self.error("nesting too deep")),
            Some(b'"') => self.string().map(Value::String),
            Some(b'-' | b'0'..=b'9') => self.integer(),
            Some(_) => Err(self.error("unexpected byte")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn object(&mut self, depth: usize) -> Result<Value, ManifestError> {
        self.expect(b'{')?;
        let mut map = BTreeMap::new();
        self.skip_ws();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(Value::Object(map));
        }
        loop {
            self.skip_ws();
            let key = self.string()?;
            self.skip_ws();
            self.expect(b':')?;
            self.skip_ws();
            let value = self.value(depth)?;
            if map.insert(key.clone(), value).is_some() {
                return Err(ManifestError::DuplicateKey(key));
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(Value::Object(map));
                }
                _ => return Err(self.error("expected ',' or '}'")),
            }
        }
    }

    fn string(&mut self) -> Result<String, ManifestError> {
        self.expect(b'"')?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated string")),
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c @ (b'"' | b'\\')) => out.push(c),
                        _ => return Err(self.error("only \\\" and \\\\ escapes are allowed")),
                    }
                    self.pos += 1;
                }
                Some(c) if c < 0x20 => return Err(self.error("control character in string")),
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| self.error("string is not UTF-8"))
    }

    fn integer(&mut self) -> Result<Value, ManifestError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(self.error("expected digits"));
        }
        if matches!(self.peek(), Some(b'.' | b'e' | b'E')) {
            return Err(self.error("only integers are allowed"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(Value::Integer(text.to_owned()))
    }
}

struct Fields {
    map: BTreeMap<String, Value>,
    path: &'static str,
}

impl Fields {
    fn new(value: Value, path: &'static str, allowed: &[&str]) -> Result<Self, ManifestError> {
        let Value::Object(map) = value else {
            return Err(ManifestError::WrongType {
                key: path.to_owned(),
                expected: "an object",
            });
        };
        if let Some(unknown) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ManifestError::UnknownKey(qualify(path, unknown)));
        }
        Ok(Self { map, path })
    }

    fn take(&mut self, key: &str) -> Result<Value, ManifestError> {
        self.map
            .remove(key)
            .ok_or_else(|| ManifestError::MissingKey(qualify(self.path, key)))
    }

    fn string(&mut self, key: &str) -> Result<String, ManifestError> {
        match self.take(key)? {
            Value::String(s) => Ok(s),
            _ => Err(ManifestError::WrongType {
                key: qualify(self.path, key),
                expected: "a string",
            }),
        }
    }

    fn int<T: TryFrom<i64>>(&mut self, key: &str) -> Result<T, ManifestError> {
        let field = qualify(self.path, key);
        let Value::Integer(text) = self.take(key)? else {
            return Err(ManifestError::WrongType {
                key: field,
                expected: "an integer",
            });
        };
        let out_of_range = || ManifestError::OutOfRange {
            field: field.clone(),
            value: text.clone(),
        };
        let wide: i64 = text.parse().map_err(|_| out_of_range())?;
        T::try_from(wide).map_err(|_| out_of_range())
    }
}

fn qualify(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_owned()
    } else {
        format!("{path}.{key}")
    }
}

fn build(value: Value) -> Result<RealismManifest, ManifestError> {
    let mut top = Fields::new(
        value,
        "",
        &[
            "algos",
            "device_id",
            "image_sha256",
            "location",
            "scores",
            "timestamp_unix",
            "version",
        ],
    )?;

    let version: i64 = top.int("version")?;
    if version != MANIFEST_VERSION as i64 {
        return Err(ManifestError::UnsupportedVersion(version.to_string()));
    }

    let mut algos = Fields::new(top.take("algos")?, "algos", &["hash", "scoring", "sig"])?;
    for (key, expected) in [
        ("hash", ALGO_HASH),
        ("scoring", ALGO_SCORING),
        ("sig", ALGO_SIG),
    ] {
        let got = algos.string(key)?;
        if got != expected {
            return Err(ManifestError::UnsupportedAlgorithm {
                key: key.to_owned(),
                value: got,
            });
        }
    }

    let device = top.string("device_id")?;
    let device_id =
        DeviceId::new(device.clone()).map_err(|_| ManifestError::InvalidDeviceId(device))?;
    let image_sha256 = ImageDigest::new(top.string("image_sha256")?)?;
    let timestamp_unix: i64 = top.int("timestamp_unix")?;

    let location = match top.map.remove("location") {
        None => None,
        Some(v) => {
            let mut loc = Fields::new(v, "location", &["lat_microdeg", "lon_microdeg"])?;
            let lat: i64 = loc.int("lat_microdeg")?;
            let lon: i64 = loc.int("lon_microdeg")?;
            Some(
                Location::new(lat, lon).map_err(|_| ManifestError::OutOfRange {
                    field: "location".into(),
                    value: format!("{lat},{lon}"),
                })?,
            )
        }
    };

    let mut s = Fields::new(
        top.take("scores")?,
        "scores",
        &["audio_sync", "depth", "motion", "overall", "thermal"],
    )?;
    let scores = ScoresMilli {
        depth: s.int("depth")?,
        thermal: s.int("thermal")?,
        audio_sync: s.int("audio_sync")?,
        motion: s.int("motion")?,
        overall: s.int("overall")?,
    };
    scores.validate()?;

    Ok(RealismManifest {
        device_id,
        timestamp_unix,
        location,
        scores,
        image_sha256,
    })
}
