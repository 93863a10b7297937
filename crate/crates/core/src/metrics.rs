//! Overlap scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Alphabet, BinaryMask, LabelMap};

/// `2|A ∩ B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.dims().check_same(&b.dims())?;
    let (mut both, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        na += x as usize;
        nb += y as usize;
        both += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: String,
    pub dice: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub alphabet: Alphabet,
    /// One entry per alphabet class, in label order.
    pub classes: Vec<ClassScore>,
    /// Task-defined unions, e.g. the whole tumour.
    pub unions: Vec<ClassScore>,
    pub macro_dice: f64,
}

impl Evaluation {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.classes
            .iter()
            .chain(&self.unions)
            .find(|c| c.class == name)
            .map(|c| c.dice)
    }
}

pub fn evaluate_labelmap(pred: &LabelMap, truth: &LabelMap) -> Result<Evaluation> {
    if pred.alphabet() != truth.alphabet() {
        return Err(Error::Config(format!(
            "alphabets differ: {:?} vs {:?}",
            pred.alphabet(),
            truth.alphabet()
        )));
    }
    pred.dims().check_same(&truth.dims())?;
    let alphabet = pred.alphabet();
    let mut classes = Vec::new();
    for (i, name) in alphabet.class_names().iter().enumerate() {
        let l = i as u32 + 1;
        classes.push(ClassScore {
            class: name.to_string(),
            dice: dice(&pred.class_mask(l), &truth.class_mask(l))?,
        });
    }
    let mut unions = Vec::new();
    if alphabet == Alphabet::Brats {
        unions.push(ClassScore {
            class: "WT".into(),
            dice: dice(&pred.foreground(), &truth.foreground())?,
        });
    }
    let macro_dice = classes.iter().map(|c| c.dice).sum::<f64>() / classes.len() as f64;
    Ok(Evaluation {
        alphabet,
        classes,
        unions,
        macro_dice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;

    #[test]
    fn dice_examples() {
        let dims = Dims::d2(4, 2);
        let a = BinaryMask::from_indices(dims, [0, 1, 2, 3]);
        let b = BinaryMask::from_indices(dims, [2, 3, 4, 5]);
        let c = BinaryMask::from_indices(dims, [6, 7]);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(dice(&a, &b).unwrap(), 0.5);
        assert_eq!(dice(&a, &c).unwrap(), 0.0);
        let e = BinaryMask::empty(dims);
        assert_eq!(dice(&e, &e).unwrap(), 1.0);
        assert!(dice(&a, &BinaryMask::empty(Dims::d2(2, 2))).is_err());
    }

    #[test]
    fn labelmap_scores() {
        let dims = Dims::d2(4, 1);
        let truth = LabelMap::new(dims, vec![1, 2, 3, 0], Alphabet::Brats).unwrap();
        let e = evaluate_labelmap(&truth, &truth).unwrap();
        assert!(e.classes.iter().all(|c| c.dice == 1.0));
        assert_eq!(e.get("WT"), Some(1.0));
        let bg = LabelMap::background(dims, Alphabet::Brats);
        let e = evaluate_labelmap(&bg, &truth).unwrap();
        assert!(e.classes.iter().all(|c| c.dice == 0.0));
        assert_eq!(e.macro_dice, 0.0);
    }
}
