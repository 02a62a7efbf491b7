use riskshard::Error;

pub const INPUT: u8 = 2;
pub const HYPOTHESIS: u8 = 3;
pub const INVARIANT: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: INPUT,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self {
            code: INVARIANT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Hypothesis(_) => HYPOTHESIS,
            Error::BisectionBracket { .. } => INVARIANT,
            _ => INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
