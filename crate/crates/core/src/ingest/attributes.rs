//! Road label attributes and their integer codes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoadType {
    Motorway = 1,
    Primary = 2,
    Secondary = 3,
    Tertiary = 4,
    Residential = 5,
    Unclassified = 6,
    CartTrack = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Surface {
    Paved = 1,
    Unpaved = 2,
    Unknown = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BridgeType {
    Bridge = 1,
    NotBridge = 2,
    Unknown = 3,
}

impl RoadType {
    pub fn from_code(code: i64) -> Option<Self> {
        Some(match code {
            1 => RoadType::Motorway,
            2 => RoadType::Primary,
            3 => RoadType::Secondary,
            4 => RoadType::Tertiary,
            5 => RoadType::Residential,
            6 => RoadType::Unclassified,
            7 => RoadType::CartTrack,
            _ => return None,
        })
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match normalize(name).as_str() {
            "motorway" => RoadType::Motorway,
            "primary" => RoadType::Primary,
            "secondary" => RoadType::Secondary,
            "tertiary" => RoadType::Tertiary,
            "residential" => RoadType::Residential,
            "unclassified" => RoadType::Unclassified,
            "carttrack" | "track" => RoadType::CartTrack,
            _ => return None,
        })
    }

    pub fn code(self) -> i64 {
        self as i64
    }
}

impl Surface {
    pub fn from_code(code: i64) -> Option<Self> {
        Some(match code {
            1 => Surface::Paved,
            2 => Surface::Unpaved,
            3 => Surface::Unknown,
            _ => return None,
        })
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match normalize(name).as_str() {
            "paved" => Surface::Paved,
            "unpaved" => Surface::Unpaved,
            "unknown" => Surface::Unknown,
            _ => return None,
        })
    }

    pub fn code(self) -> i64 {
        self as i64
    }
}

impl BridgeType {
    pub fn from_code(code: i64) -> Option<Self> {
        Some(match code {
            1 => BridgeType::Bridge,
            2 => BridgeType::NotBridge,
            3 => BridgeType::Unknown,
            _ => return None,
        })
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match normalize(name).as_str() {
            "bridge" | "yes" | "true" => BridgeType::Bridge,
            "notabridge" | "notbridge" | "no" | "false" => BridgeType::NotBridge,
            "unknown" => BridgeType::Unknown,
            _ => return None,
        })
    }

    pub fn code(self) -> i64 {
        self as i64
    }
}

/// Lowercase and drop separators so "Cart track", "cart_track" and
/// "CartTrack" compare equal.
fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// The four label attributes carried by every road centerline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoadAttributes {
    pub road_type: RoadType,
    pub paved: Surface,
    pub bridge_type: BridgeType,
    pub lane_number: u32,
}

impl Default for RoadAttributes {
    fn default() -> Self {
        RoadAttributes {
            road_type: RoadType::Unclassified,
            paved: Surface::Unknown,
            bridge_type: BridgeType::Unknown,
            lane_number: 1,
        }
    }
}

pub(crate) const ROAD_TYPE_KEYS: &[&str] = &["road_type"];
pub(crate) const PAVED_KEYS: &[&str] = &["paved"];
// Shapefile exports truncate field names to ten characters.
pub(crate) const BRIDGE_KEYS: &[&str] = &["bridge_type", "bridge_typ", "bridge"];
pub(crate) const LANE_KEYS: &[&str] = &["lane_number", "lane_numbe", "lanes"];

/// Read attributes from a feature's properties, falling back to defaults.
/// Every fallback adds a warning naming the attribute.
pub(crate) fn read_attributes(
    props: Option<&serde_json::Map<String, Value>>,
    warnings: &mut Vec<String>,
) -> RoadAttributes {
    let defaults = RoadAttributes::default();
    let road_type = read_enum(
        props,
        ROAD_TYPE_KEYS,
        RoadType::from_code,
        RoadType::from_name,
        defaults.road_type,
        warnings,
    );
    let paved = read_enum(
        props,
        PAVED_KEYS,
        Surface::from_code,
        Surface::from_name,
        defaults.paved,
        warnings,
    );
    let bridge_type = match lookup(props, BRIDGE_KEYS) {
        Some((_, Value::Bool(true))) => BridgeType::Bridge,
        Some((_, Value::Bool(false))) => BridgeType::NotBridge,
        _ => read_enum(
            props,
            BRIDGE_KEYS,
            BridgeType::from_code,
            BridgeType::from_name,
            defaults.bridge_type,
            warnings,
        ),
    };
    let lane_number = match lookup(props, LANE_KEYS) {
        None => {
            warnings.push(format!(
                "missing \"{}\"; defaulting to {}",
                LANE_KEYS[0], defaults.lane_number
            ));
            defaults.lane_number
        }
        Some((key, v)) => match as_integer(v) {
            Some(n) if n >= 1 && n <= u32::MAX as i64 => n as u32,
            _ => {
                warnings.push(format!(
                    "invalid \"{key}\" value {v}; defaulting to {}",
                    defaults.lane_number
                ));
                defaults.lane_number
            }
        },
    };
    RoadAttributes {
        road_type,
        paved,
        bridge_type,
        lane_number,
    }
}

fn lookup<'a>(
    props: Option<&'a serde_json::Map<String, Value>>,
    keys: &[&'static str],
) -> Option<(&'static str, &'a Value)> {
    let props = props?;
    keys.iter()
        .find_map(|k| props.get(*k).filter(|v| !v.is_null()).map(|v| (*k, v)))
}

/// Integers, integral floats, and numeric strings.
pub(crate) fn as_integer(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().filter(|f| f.fract() == 0.0 && f.abs() < 9e15).map(|f| f as i64)),
        Value::String(s) => s.trim().parse::<i64>().ok(),
        _ => None,
    }
}

fn read_enum<T: std::fmt::Debug + Copy>(
    props: Option<&serde_json::Map<String, Value>>,
    keys: &[&'static str],
    from_code: fn(i64) -> Option<T>,
    from_name: fn(&str) -> Option<T>,
    default: T,
    warnings: &mut Vec<String>,
) -> T {
    let Some((key, value)) = lookup(props, keys) else {
        warnings.push(format!("missing \"{}\"; defaulting to {default:?}", keys[0]));
        return default;
    };
    let parsed = as_integer(value).and_then(from_code).or_else(|| match value {
        Value::String(s) => from_name(s),
        _ => None,
    });
    parsed.unwrap_or_else(|| {
        warnings.push(format!(
            "unrecognised \"{key}\" value {value}; defaulting to {default:?}"
        ));
        default
    })
}
