//! uiautomator hierarchy dumps: parsing, coordinate mapping and hit-testing.

mod bounds;
mod dump;
mod hit;

pub use bounds::{format_bounds, parse_bounds, BoundsError, Rect};
pub use dump::{parse_ui_dump, DumpError, UiNode, UiTree};
pub use hit::{component_summary, hit_test, hit_test_with_ancestor, map_raw_to_screen, Hit};

use serde::{Deserialize, Serialize};

/// Hit-testing policy recorded in every report so readers know how targets
/// were inferred.
pub const HIT_POLICY: &str = "deepest-containing; half-open bounds; ties to later document order; raw axes scaled linearly";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScreenPoint {
    pub x: i32,
    pub y: i32,
}

impl ScreenPoint {
    pub fn new(x: i32, y: i32) -> Self {
        ScreenPoint { x, y }
    }

    pub fn distance(&self, other: &ScreenPoint) -> f64 {
        let dx = f64::from(other.x) - f64::from(self.x);
        let dy = f64::from(other.y) - f64::from(self.y);
        dx.hypot(dy)
    }
}

/// Raw touch axis ranges and the screen size they map onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisRanges {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
    pub screen_width: u32,
    pub screen_height: u32,
}

impl AxisRanges {
    /// Ranges whose raw units are already pixels.
    pub fn identity(screen_width: u32, screen_height: u32) -> Self {
        AxisRanges {
            x_min: 0,
            x_max: screen_width as i32 - 1,
            y_min: 0,
            y_max: screen_height as i32 - 1,
            screen_width,
            screen_height,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(format!("empty axis range {self:?}"));
        }
        if self.screen_width == 0 || self.screen_height == 0 {
            return Err("screen dimensions must be positive".into());
        }
        Ok(())
    }
}

/// Flattened attributes of the component a step landed on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub class_name: String,
    pub resource_id: String,
    pub text: String,
    pub clickable: bool,
    pub bounds: Rect,
}

impl ComponentSummary {
    /// Text if present, then resource id, then class name.
    pub fn label(&self) -> &str {
        if !self.text.is_empty() {
            &self.text
        } else if !self.resource_id.is_empty() {
            &self.resource_id
        } else {
            &self.class_name
        }
    }
}
