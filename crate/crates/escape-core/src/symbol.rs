//! The edge alphabet: nine fixed symbols plus the four-component grid symbols
//! (letter, orientation, temperature, shade), and the red/green color axis
//! carried by edges of a structure.
//!
//! A [`SymbolPattern`] stands for a set of symbols: any component may be left
//! as a wildcard. Languages are built over patterns so that their automata
//! stay small no matter how many shades an instance declares.

use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Edge color over the doubled signature. Every edge of a structure is
/// either green or red; temperature is an independent axis of the symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Green,
    Red,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Green => Color::Red,
            Color::Red => Color::Green,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Color::Green => "G",
            Color::Red => "R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Temperature {
    #[serde(rename = "C")]
    Cold,
    #[serde(rename = "W")]
    Warm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "H")]
    Horizontal,
    #[serde(rename = "V")]
    Vertical,
}

impl Orientation {
    pub fn letter(self) -> &'static str {
        match self {
            Orientation::Horizontal => "H",
            Orientation::Vertical => "V",
        }
    }
}

/// An interned shade name. Shade sets come from tiling instances; "gray" and
/// "black" are always present.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shade(Arc<str>);

impl Shade {
    pub fn new(name: &str) -> Shade {
        Shade(Arc::from(name))
    }

    pub fn gray() -> Shade {
        Shade::new("gray")
    }

    pub fn black() -> Shade {
        Shade::new("black")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Shade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Shade {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Shade {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Shade, D::Error> {
        Ok(Shade::new(&String::deserialize(d)?))
    }
}

/// The symbol kinds in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Alpha,
    X,
    Y,
    Dollar,
    Omega,
    Grid,
}

/// One symbol of the alphabet. Derived `Ord` gives the canonical shortlex
/// component order: kind first (alpha, x, y, dollar, omega, grid), then cold
/// before warm, A before B, horizontal before vertical, shades lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Alpha(Temperature),
    X(Temperature),
    Y(Temperature),
    Dollar(Temperature),
    Omega,
    Grid {
        temperature: Temperature,
        letter: Letter,
        orientation: Orientation,
        shade: Shade,
    },
}

impl Symbol {
    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Alpha(_) => SymbolKind::Alpha,
            Symbol::X(_) => SymbolKind::X,
            Symbol::Y(_) => SymbolKind::Y,
            Symbol::Dollar(_) => SymbolKind::Dollar,
            Symbol::Omega => SymbolKind::Omega,
            Symbol::Grid { .. } => SymbolKind::Grid,
        }
    }

    /// Omega has no temperature; every other symbol has exactly one.
    pub fn temperature(&self) -> Option<Temperature> {
        match self {
            Symbol::Alpha(t) | Symbol::X(t) | Symbol::Y(t) | Symbol::Dollar(t) => Some(*t),
            Symbol::Omega => None,
            Symbol::Grid { temperature, .. } => Some(*temperature),
        }
    }

    pub fn is_warm(&self) -> bool {
        self.temperature() == Some(Temperature::Warm)
    }

    pub fn is_cold(&self) -> bool {
        self.temperature() == Some(Temperature::Cold)
    }

    pub fn grid(letter: Letter, orientation: Orientation, temperature: Temperature, shade: Shade) -> Symbol {
        Symbol::Grid { temperature, letter, orientation, shade }
    }

    pub fn shade(&self) -> Option<&Shade> {
        match self {
            Symbol::Grid { shade, .. } => Some(shade),
            _ => None,
        }
    }

    /// The same symbol with its shade component dropped (grid symbols only);
    /// used for shade-blind comparisons.
    pub fn erase_shade(&self) -> Symbol {
        match self {
            Symbol::Grid { temperature, letter, orientation, .. } => Symbol::Grid {
                temperature: *temperature,
                letter: *letter,
                orientation: *orientation,
                shade: Shade::new("*"),
            },
            other => other.clone(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |t: &Temperature| match t {
            Temperature::Cold => "C",
            Temperature::Warm => "W",
        };
        match self {
            Symbol::Alpha(x) => write!(f, "alpha^{}", t(x)),
            Symbol::X(x) => write!(f, "x^{}", t(x)),
            Symbol::Y(x) => write!(f, "y^{}", t(x)),
            Symbol::Dollar(x) => write!(f, "$^{}", t(x)),
            Symbol::Omega => write!(f, "omega"),
            Symbol::Grid { temperature, letter, orientation, shade } => {
                let l = match letter {
                    Letter::A => "A",
                    Letter::B => "B",
                };
                write!(f, "{}_{}^{}[{}]", l, orientation.letter(), t(temperature), shade)
            }
        }
    }
}

impl std::str::FromStr for Symbol {
    type Err = String;

    /// Parses the display form: `alpha^C`, `x^W`, `$^C`, `omega`,
    /// `A_H^C[gray]`.
    fn from_str(s: &str) -> Result<Symbol, String> {
        if s == "omega" {
            return Ok(Symbol::Omega);
        }
        let temp = |t: &str| match t {
            "C" => Ok(Temperature::Cold),
            "W" => Ok(Temperature::Warm),
            other => Err(format!("bad temperature {other:?}")),
        };
        if let Some((head, t)) = s.split_once('^') {
            match head {
                "alpha" => return Ok(Symbol::Alpha(temp(t)?)),
                "x" => return Ok(Symbol::X(temp(t)?)),
                "y" => return Ok(Symbol::Y(temp(t)?)),
                "$" => return Ok(Symbol::Dollar(temp(t)?)),
                _ => {}
            }
            // grid: L_O^T[shade]
            let (letter, orient) = match head {
                "A_H" => (Letter::A, Orientation::Horizontal),
                "A_V" => (Letter::A, Orientation::Vertical),
                "B_H" => (Letter::B, Orientation::Horizontal),
                "B_V" => (Letter::B, Orientation::Vertical),
                other => return Err(format!("bad symbol head {other:?}")),
            };
            let (t, shade) = t
                .split_once('[')
                .and_then(|(t, rest)| rest.strip_suffix(']').map(|s| (t, s)))
                .ok_or_else(|| format!("grid symbol {s:?} needs a [shade]"))?;
            return Ok(Symbol::grid(letter, orient, temp(t)?, Shade::new(shade)));
        }
        Err(format!("unparseable symbol {s:?}"))
    }
}

pub fn word_from_string(s: &str) -> Result<Word, String> {
    s.split_whitespace().map(str::parse).collect()
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    kind: SymbolKind,
    temp: Option<Temperature>,
    letter: Option<Letter>,
    orient: Option<Orientation>,
    shade: Option<Shade>,
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (letter, orient, shade) = match self {
            Symbol::Grid { letter, orientation, shade, .. } => {
                (Some(*letter), Some(*orientation), Some(shade.clone()))
            }
            _ => (None, None, None),
        };
        SymbolJson { kind: self.kind(), temp: self.temperature(), letter, orient, shade }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Symbol, D::Error> {
        let j = SymbolJson::deserialize(d)?;
        let temp = |j: &SymbolJson| j.temp.ok_or_else(|| D::Error::custom("missing temp"));
        Ok(match j.kind {
            SymbolKind::Alpha => Symbol::Alpha(temp(&j)?),
            SymbolKind::X => Symbol::X(temp(&j)?),
            SymbolKind::Y => Symbol::Y(temp(&j)?),
            SymbolKind::Dollar => Symbol::Dollar(temp(&j)?),
            SymbolKind::Omega => Symbol::Omega,
            SymbolKind::Grid => Symbol::Grid {
                temperature: temp(&j)?,
                letter: j.letter.ok_or_else(|| D::Error::custom("missing letter"))?,
                orientation: j.orient.ok_or_else(|| D::Error::custom("missing orient"))?,
                shade: j.shade.ok_or_else(|| D::Error::custom("missing shade"))?,
            },
        })
    }
}

/// A colored edge label: the only thing that ever appears on an edge of a
/// structure. Bare (uncolored) symbols never label edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub color: Color,
    pub symbol: Symbol,
}

impl EdgeLabel {
    pub fn green(symbol: Symbol) -> EdgeLabel {
        EdgeLabel { color: Color::Green, symbol }
    }

    pub fn red(symbol: Symbol) -> EdgeLabel {
        EdgeLabel { color: Color::Red, symbol }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.color.letter(), self.symbol)
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.letter())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Color, D::Error> {
        match String::deserialize(d)?.as_str() {
            "G" => Ok(Color::Green),
            "R" => Ok(Color::Red),
            other => Err(D::Error::custom(format!("bad color {other:?}"))),
        }
    }
}

/// A set of symbols given componentwise: `None` in a component is a
/// wildcard. Constraints on letter, orientation or shade restrict the match
/// to grid symbols; a temperature constraint excludes omega.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolPattern {
    pub kind: Option<SymbolKind>,
    pub temp: Option<Temperature>,
    pub letter: Option<Letter>,
    pub orient: Option<Orientation>,
    pub shade: Option<Shade>,
}

impl SymbolPattern {
    /// Matches every symbol of the alphabet.
    pub fn any() -> SymbolPattern {
        SymbolPattern { kind: None, temp: None, letter: None, orient: None, shade: None }
    }

    /// Matches exactly one symbol.
    pub fn exact(symbol: &Symbol) -> SymbolPattern {
        match symbol {
            Symbol::Grid { temperature, letter, orientation, shade } => SymbolPattern {
                kind: Some(SymbolKind::Grid),
                temp: Some(*temperature),
                letter: Some(*letter),
                orient: Some(*orientation),
                shade: Some(shade.clone()),
            },
            other => SymbolPattern {
                kind: Some(other.kind()),
                temp: other.temperature(),
                letter: None,
                orient: None,
                shade: None,
            },
        }
    }

    /// Grid symbols with the given fixed components; `None` leaves the
    /// component wild.
    pub fn grid(
        letter: Option<Letter>,
        orient: Option<Orientation>,
        temp: Option<Temperature>,
        shade: Option<Shade>,
    ) -> SymbolPattern {
        SymbolPattern { kind: Some(SymbolKind::Grid), temp, letter, orient, shade }
    }

    pub fn matches(&self, symbol: &Symbol) -> bool {
        if let Some(k) = self.kind {
            if symbol.kind() != k {
                return false;
            }
        }
        if let Some(t) = self.temp {
            if symbol.temperature() != Some(t) {
                return false;
            }
        }
        match symbol {
            Symbol::Grid { letter, orientation, shade, .. } => {
                if let Some(l) = self.letter {
                    if *letter != l {
                        return false;
                    }
                }
                if let Some(o) = self.orient {
                    if *orientation != o {
                        return false;
                    }
                }
                if let Some(s) = &self.shade {
                    if shade != s {
                        return false;
                    }
                }
                true
            }
            _ => self.letter.is_none() && self.orient.is_none() && self.shade.is_none(),
        }
    }

    /// All matching symbols over the given shade set, in canonical order.
    pub fn expand(&self, shades: &[Shade]) -> Vec<Symbol> {
        let mut out = Vec::new();
        for symbol in alphabet(shades) {
            if self.matches(&symbol) {
                out.push(symbol);
            }
        }
        out
    }

    /// How many symbols of the alphabet (over `n_shades` shades) match.
    pub fn denotation_size(&self, n_shades: u64) -> u64 {
        let temps = |fixed: Option<Temperature>| if fixed.is_some() { 1 } else { 2 };
        let mut total = 0u64;
        let kinds = [
            SymbolKind::Alpha,
            SymbolKind::X,
            SymbolKind::Y,
            SymbolKind::Dollar,
            SymbolKind::Omega,
            SymbolKind::Grid,
        ];
        for kind in kinds {
            if self.kind.is_some() && self.kind != Some(kind) {
                continue;
            }
            match kind {
                SymbolKind::Omega => {
                    if self.temp.is_none() && self.letter.is_none() && self.orient.is_none() && self.shade.is_none() {
                        total += 1;
                    }
                }
                SymbolKind::Grid => {
                    let l = if self.letter.is_some() { 1 } else { 2 };
                    let o = if self.orient.is_some() { 1 } else { 2 };
                    let s = if self.shade.is_some() { 1 } else { n_shades };
                    total += l * o * temps(self.temp) * s;
                }
                _ => {
                    if self.letter.is_none() && self.orient.is_none() && self.shade.is_none() {
                        total += temps(self.temp);
                    }
                }
            }
        }
        total
    }
}

impl fmt::Display for SymbolPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            None => "*",
            Some(SymbolKind::Alpha) => "alpha",
            Some(SymbolKind::X) => "x",
            Some(SymbolKind::Y) => "y",
            Some(SymbolKind::Dollar) => "$",
            Some(SymbolKind::Omega) => "omega",
            Some(SymbolKind::Grid) => "grid",
        };
        let opt = |s: Option<String>| s.unwrap_or_else(|| "*".into());
        write!(
            f,
            "{}:{}{}{}[{}]",
            kind,
            opt(self.letter.map(|l| format!("{l:?}"))),
            opt(self.orient.map(|o| o.letter().to_string())),
            opt(self.temp.map(|t| format!("^{t:?}"))),
            opt(self.shade.as_ref().map(|s| s.to_string())),
        )
    }
}

/// The full alphabet over a shade set, in canonical symbol order.
/// Its size is 8 * |shades| + 9.
pub fn alphabet(shades: &[Shade]) -> Vec<Symbol> {
    let mut out = Vec::new();
    for t in [Temperature::Cold, Temperature::Warm] {
        out.push(Symbol::Alpha(t));
    }
    for t in [Temperature::Cold, Temperature::Warm] {
        out.push(Symbol::X(t));
    }
    for t in [Temperature::Cold, Temperature::Warm] {
        out.push(Symbol::Y(t));
    }
    for t in [Temperature::Cold, Temperature::Warm] {
        out.push(Symbol::Dollar(t));
    }
    out.push(Symbol::Omega);
    let mut sorted_shades: Vec<Shade> = shades.to_vec();
    sorted_shades.sort();
    for t in [Temperature::Cold, Temperature::Warm] {
        for l in [Letter::A, Letter::B] {
            for o in [Orientation::Horizontal, Orientation::Vertical] {
                for s in &sorted_shades {
                    out.push(Symbol::grid(l, o, t, s.clone()));
                }
            }
        }
    }
    out
}

/// A word over the bare alphabet. Words acquire a color only when they are
/// written onto a structure.
pub type Word = Vec<Symbol>;

pub fn word_to_string(word: &[Symbol]) -> String {
    word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}
