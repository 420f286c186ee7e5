use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("stability violation: {0}")]
    Stability(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("order violation: min gap {0:e}")]
    Order(f64),
    #[error("mountain-pass bracket lost: c* = {c_star}, max endpoint energy = {endpoint}")]
    Bracket { c_star: f64, endpoint: f64 },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
