//! Model-backed realization of transformed formulas.

use std::sync::Arc;

use folmt_core::pipeline::Realizer;
use folmt_core::realize::Lexicon;
use folmt_core::{print_formula, Formula};

use crate::parse::{parse_translation, ParseMode};
use crate::prompt::translation_prompt;
use crate::sut::{Request, RequestMeta, Sut};

/// Realizer that asks a model to translate, with the original pair as context.
/// Added premises have no original; their context fields read `N/A`.
pub struct LlmRealizer {
    pub sut: Arc<dyn Sut>,
    pub mode: ParseMode,
}

impl LlmRealizer {
    pub fn new(sut: Arc<dyn Sut>) -> Self {
        LlmRealizer {
            sut,
            mode: ParseMode::Lenient,
        }
    }
}

impl Realizer for LlmRealizer {
    fn realize(&self, original: Option<(&Formula, &str)>, transformed: &Formula, _: &Lexicon) -> Result<String, String> {
        let (ofol, onl) = match original {
            Some((f, nl)) => (print_formula(f), nl.to_string()),
            None => ("N/A".to_string(), "N/A".to_string()),
        };
        let target = print_formula(transformed);
        let request = Request {
            prompt: translation_prompt(&ofol, &onl, &target),
            meta: RequestMeta::Translation {
                transformed_fol: target.clone(),
            },
        };
        let raw = self.sut.query(&request).map_err(|e| e.to_string())?;
        parse_translation(&raw, self.mode).ok_or_else(|| format!("no translation in response for {target}"))
    }
}
