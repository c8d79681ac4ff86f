//! Browser driver abstraction: navigate, screenshot, console capture, and
//! the pointer/keyboard primitives the verification copilot and the visual
//! evaluator need.
//!
//! Two implementations ship: [`CdpDriver`] speaks the DevTools wire protocol
//! to a real headless Chromium, and [`BuiltinDriver`] is a deterministic
//! in-process driver for fixture sites, used by the offline test suite.

mod builtin;
mod cdp;
mod ws;

pub use builtin::BuiltinDriver;
pub use cdp::{discover_browser_binary, CdpDriver};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

/// One interactable element as seen by the driver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementInfo {
    pub role: String,
    pub text: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsoleLevel {
    Log,
    Info,
    Debug,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsoleEntry {
    pub level: ConsoleLevel,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScrollDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScrollTarget {
    Window,
    /// Viewport pixel coordinates of the widget to scroll.
    Point(f64, f64),
}

#[derive(Debug, Error)]
pub enum BrowserError {
    #[error("page unreachable: {0}")]
    Unreachable(String),
    #[error("no element with text {0:?}")]
    TextNotFound(String),
    #[error("no element accepting input for target {0:?}")]
    InputNotFound(String),
    #[error("browser session crashed: {0}")]
    Crashed(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("no browser binary found; set WEBGAUGE_BROWSER or install chromium")]
    NoBrowserBinary,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BrowserError {
    /// A crash means the session is unusable and the trajectory should be
    /// flagged fatal; everything else is a recoverable observation.
    pub fn is_crash(&self) -> bool {
        matches!(self, BrowserError::Crashed(_) | BrowserError::Io(_))
    }
}

/// The driver surface, implementable over any devtools-style wire protocol.
/// One driver instance serves exactly one trajectory at a time.
pub trait BrowserDriver: Send {
    fn navigate(&mut self, url: &str) -> Result<(), BrowserError>;
    fn current_url(&self) -> Option<String>;
    fn viewport(&self) -> (u32, u32);
    /// PNG bytes of the current page state.
    fn screenshot(&mut self) -> Result<Vec<u8>, BrowserError>;
    /// Drain the console buffer accumulated since the last call.
    fn take_console(&mut self) -> Result<Vec<ConsoleEntry>, BrowserError>;
    fn click_text(&mut self, label: &str) -> Result<(), BrowserError>;
    /// Click at viewport pixel coordinates.
    fn click_point(&mut self, x: f64, y: f64) -> Result<(), BrowserError>;
    fn type_text(&mut self, target: &str, content: &str) -> Result<(), BrowserError>;
    fn type_point(&mut self, x: f64, y: f64, content: &str) -> Result<(), BrowserError>;
    fn press_key(&mut self, key: &str) -> Result<(), BrowserError>;
    fn scroll(&mut self, target: ScrollTarget, direction: ScrollDirection)
        -> Result<(), BrowserError>;
    fn go_back(&mut self) -> Result<(), BrowserError>;
    /// Pause for pending page work; deterministic drivers may no-op.
    fn wait_briefly(&mut self) -> Result<(), BrowserError>;
    /// Enumerate interactable elements (links, buttons, inputs, scroll
    /// containers) in document order.
    fn enumerate_interactables(&mut self) -> Result<Vec<ElementInfo>, BrowserError>;
    /// Canned value used to auto-accept native prompt dialogs.
    fn set_dialog_response(&mut self, value: &str);

    /// Click at viewport-percent coordinates (0-100 on each axis).
    fn click_percent(&mut self, x_pct: f64, y_pct: f64) -> Result<(), BrowserError> {
        let (w, h) = self.viewport();
        self.click_point(x_pct / 100.0 * w as f64, y_pct / 100.0 * h as f64)
    }

    /// Type at viewport-percent coordinates.
    fn type_percent(&mut self, x_pct: f64, y_pct: f64, content: &str) -> Result<(), BrowserError> {
        let (w, h) = self.viewport();
        self.type_point(
            x_pct / 100.0 * w as f64,
            y_pct / 100.0 * h as f64,
            content,
        )
    }
}

/// Default value auto-filled into native prompt dialogs.
pub const DIALOG_AUTOFILL: &str = "Test Input Value";
