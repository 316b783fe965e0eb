//! Aggregation of per-model SHAP tables into feature rankings, and
//! combination of rankings across models by Dowdall or Borda voting.
//!
//! Pipeline per model: sum `|shap_value|` over instances and classes for
//! each raw feature, sum the three variable-indexed variants into the
//! variable-merged feature, and optionally sum features that differ only in
//! outer `sum` versus `avg`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::features::{parse_feature_name, FeatureDescriptor, MergedFeature, VarSlot};

#[derive(Clone, Debug, PartialEq)]
pub struct ShapRecord {
    pub model: String,
    pub class_label: u32,
    pub instance: String,
    pub feature: FeatureDescriptor,
    pub shap_value: f64,
}

#[derive(Deserialize)]
struct ShapRow {
    model: String,
    class: u32,
    instance: String,
    feature: String,
    shap_value: f64,
}

/// Reads `model,class,instance,feature,shap_value` rows. Feature names are
/// variable-indexed functional names; value-identical spellings are mapped
/// to their canonical form.
pub fn load_shap_csv<R: Read>(reader: R) -> Result<Vec<ShapRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["model", "class", "instance", "feature", "shap_value"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingHeader(format!("SHAP table lacks column `{col}`")));
        }
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<ShapRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::MalformedRow { line, msg: e.to_string() })?;
        let (feature, slot) = parse_feature_name(&row.feature)?;
        let VarSlot::Index(variable) = slot else {
            return Err(Error::MalformedRow {
                line,
                msg: format!("`{}` has no variable index", row.feature),
            });
        };
        if row.class == 0 {
            return Err(Error::MalformedRow { line, msg: "class labels start at 1".into() });
        }
        if !row.shap_value.is_finite() {
            return Err(Error::MalformedRow { line, msg: "non-finite SHAP value".into() });
        }
        out.push(ShapRecord {
            model: row.model,
            class_label: row.class,
            instance: row.instance,
            feature: feature.canonical().at(variable),
            shap_value: row.shap_value,
        });
    }
    Ok(out)
}

/// Model identifiers in order of first appearance.
pub fn models(records: &[ShapRecord]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    records.iter().filter(|r| seen.insert(r.model.as_str())).map(|r| r.model.clone()).collect()
}

/// Summed absolute SHAP value per raw (variable-indexed) feature.
pub fn raw_scores(records: &[ShapRecord], model: &str) -> Result<BTreeMap<FeatureDescriptor, f64>> {
    let mut scores = BTreeMap::new();
    for r in records.iter().filter(|r| r.model == model) {
        *scores.entry(r.feature).or_insert(0.0) += r.shap_value.abs();
    }
    if scores.is_empty() {
        return Err(Error::EmptyRecords(model.to_string()));
    }
    Ok(scores)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRanking {
    pub model: String,
    /// Sorted by descending score, equal scores by name.
    pub entries: Vec<(MergedFeature, f64)>,
    /// Adjacent entries whose scores were equal.
    pub ties: Vec<(MergedFeature, MergedFeature)>,
}

impl FeatureRanking {
    fn from_scores(model: &str, scores: BTreeMap<MergedFeature, f64>) -> Self {
        let mut entries: Vec<(MergedFeature, f64)> = scores.into_iter().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.merged_name().cmp(&b.0.merged_name())));
        let ties = entries.windows(2).filter(|w| w[0].1 == w[1].1).map(|w| (w[0].0, w[1].0)).collect();
        FeatureRanking { model: model.to_string(), entries, ties }
    }

    pub fn features(&self) -> Vec<MergedFeature> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// A ranking with unit-spaced scores, for voting over given orders.
    pub fn from_order(model: &str, order: &[MergedFeature]) -> Self {
        let n = order.len();
        let entries = order.iter().enumerate().map(|(i, &f)| (f, (n - i) as f64)).collect();
        FeatureRanking { model: model.to_string(), entries, ties: Vec::new() }
    }
}

/// Scores summed over the variable index.
pub fn variable_merged_scores(records: &[ShapRecord], model: &str) -> Result<BTreeMap<MergedFeature, f64>> {
    let mut merged = BTreeMap::new();
    for (d, s) in raw_scores(records, model)? {
        *merged.entry(d.feature).or_insert(0.0) += s;
    }
    Ok(merged)
}

/// Sums scores of features that differ only in outer `sum` versus `avg`.
pub fn proportional_merge(scores: &BTreeMap<MergedFeature, f64>) -> BTreeMap<MergedFeature, f64> {
    let mut merged = BTreeMap::new();
    for (f, s) in scores {
        *merged.entry(f.proportional_representative()).or_insert(0.0) += s;
    }
    merged
}

pub fn model_feature_ranking(
    records: &[ShapRecord],
    model: &str,
    merge_proportional: bool,
) -> Result<FeatureRanking> {
    let mut scores = variable_merged_scores(records, model)?;
    if merge_proportional {
        scores = proportional_merge(&scores);
    }
    Ok(FeatureRanking::from_scores(model, scores))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoteMethod {
    /// Reward `1/r` for rank `r`; highest total wins.
    Dowdall,
    /// Penalty `r` for rank `r`; lowest total wins.
    Borda,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VotedScores {
    pub method: VoteMethod,
    /// Best first: descending reward for Dowdall, ascending penalty for Borda.
    pub entries: Vec<(MergedFeature, BigRational)>,
    pub ties: Vec<(MergedFeature, MergedFeature)>,
}

fn check_universe(rankings: &[FeatureRanking]) -> Result<()> {
    let Some(first) = rankings.first() else {
        return Err(Error::TooFew { what: "voting", min: 1, got: 0 });
    };
    let universe: BTreeSet<_> = first.features().into_iter().collect();
    for r in rankings {
        let this: BTreeSet<_> = r.features().into_iter().collect();
        if this != universe || this.len() != r.entries.len() {
            return Err(Error::UniverseMismatch(format!(
                "ranking `{}` differs from ranking `{}`",
                r.model, first.model
            )));
        }
    }
    Ok(())
}

fn vote(rankings: &[FeatureRanking], method: VoteMethod) -> Result<VotedScores> {
    check_universe(rankings)?;
    let mut totals: BTreeMap<MergedFeature, BigRational> = BTreeMap::new();
    for r in rankings {
        for (i, (f, _)) in r.entries.iter().enumerate() {
            let rank = BigInt::from(i + 1);
            let w = match method {
                VoteMethod::Dowdall => BigRational::new(BigInt::one(), rank),
                VoteMethod::Borda => BigRational::from_integer(rank),
            };
            *totals.entry(*f).or_insert_with(BigRational::zero) += w;
        }
    }
    let mut entries: Vec<_> = totals.into_iter().collect();
    entries.sort_by(|a, b| {
        let by_score = match method {
            VoteMethod::Dowdall => b.1.cmp(&a.1),
            VoteMethod::Borda => a.1.cmp(&b.1),
        };
        by_score.then_with(|| a.0.merged_name().cmp(&b.0.merged_name()))
    });
    let ties = entries.windows(2).filter(|w| w[0].1 == w[1].1).map(|w| (w[0].0, w[1].0)).collect();
    Ok(VotedScores { method, entries, ties })
}

pub fn dowdall(rankings: &[FeatureRanking]) -> Result<VotedScores> {
    vote(rankings, VoteMethod::Dowdall)
}

pub fn borda(rankings: &[FeatureRanking]) -> Result<VotedScores> {
    vote(rankings, VoteMethod::Borda)
}

pub fn top_k(scores: &VotedScores, k: usize) -> Result<Vec<MergedFeature>> {
    if k > scores.entries.len() {
        return Err(Error::KTooLarge { k, len: scores.entries.len() });
    }
    Ok(scores.entries[..k].iter().map(|e| e.0).collect())
}

/// Every stage of the pipeline for all models in a SHAP table.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub raw: Vec<(String, BTreeMap<FeatureDescriptor, f64>)>,
    pub variable_merged: Vec<FeatureRanking>,
    pub proportional: Vec<FeatureRanking>,
    pub voted: VotedScores,
}

pub fn rank_pipeline(records: &[ShapRecord], method: VoteMethod) -> Result<RankReport> {
    let models = models(records);
    if models.is_empty() {
        return Err(Error::EmptyRecords("<any>".into()));
    }
    let mut raw = Vec::new();
    let mut variable_merged = Vec::new();
    let mut proportional = Vec::new();
    for m in &models {
        raw.push((m.clone(), raw_scores(records, m)?));
        variable_merged.push(model_feature_ranking(records, m, false)?);
        proportional.push(model_feature_ranking(records, m, true)?);
    }
    let voted = vote(&proportional, method)?;
    Ok(RankReport { raw, variable_merged, proportional, voted })
}

/// `model,feature,score` rows for per-model stages.
pub fn write_ranking_csv<W: Write>(out: W, rankings: &[FeatureRanking]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "feature", "score"])?;
    for r in rankings {
        for (f, s) in &r.entries {
            w.write_record([r.model.as_str(), &f.merged_name(), &s.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw_csv<W: Write>(out: W, raw: &[(String, BTreeMap<FeatureDescriptor, f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "feature", "score"])?;
    for (model, scores) in raw {
        for (d, s) in scores {
            w.write_record([model.as_str(), &d.name(), &s.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `feature,score` rows with the exact rational score and its decimal value.
pub fn write_voted_csv<W: Write>(out: W, voted: &VotedScores) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "score", "score_decimal"])?;
    for (f, s) in &voted.entries {
        w.write_record([f.merged_name(), s.to_string(), format!("{:.6}", ratio_to_f64(s))])?;
    }
    w.flush()?;
    Ok(())
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(name: &str) -> MergedFeature {
        MergedFeature::parse_camel(name).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ranking(model: &str, names: &[&str]) -> FeatureRanking {
        FeatureRanking::from_order(model, &names.iter().map(|n| f(n)).collect::<Vec<_>>())
    }

    fn rec(model: &str, feature: &str, value: f64) -> ShapRecord {
        let (m, slot) = parse_feature_name(feature).unwrap();
        let VarSlot::Index(v) = slot else { panic!() };
        ShapRecord {
            model: model.into(),
            class_label: 1,
            instance: "0".into(),
            feature: m.at(v),
            shap_value: value,
        }
    }

    const A: &str = "SumMaxV";
    const B: &str = "AvgAvgV";
    const C: &str = "SumSumV";
    const D: &str = "MaxMaxV";
    const E: &str = "SumSgSumV";

    #[test]
    fn dowdall_hand_example() {
        let rs = [ranking("1", &[A, B, C]), ranking("2", &[B, A, C]), ranking("3", &[A, C, B])];
        let v = dowdall(&rs).unwrap();
        let got: Vec<_> = v.entries.iter().map(|(f, s)| (f.camel_name(), s.clone())).collect();
        assert_eq!(got, vec![(A.into(), q(5, 2)), (B.into(), q(11, 6)), (C.into(), q(7, 6))]);
    }

    #[test]
    fn borda_hand_example() {
        let rs = [ranking("1", &[A, B, C]), ranking("2", &[B, A, C]), ranking("3", &[A, C, B])];
        let v = borda(&rs).unwrap();
        let got: Vec<_> = v.entries.iter().map(|(f, s)| (f.camel_name(), s.clone())).collect();
        assert_eq!(got, vec![(A.into(), q(4, 1)), (B.into(), q(6, 1)), (C.into(), q(8, 1))]);
    }

    #[test]
    fn borda_and_dowdall_disagree_on_badly_ranked_winner() {
        let order = [A, B, C, D, E];
        let rs = [
            ranking("1", &order),
            ranking("2", &order),
            ranking("3", &order),
            ranking("4", &[B, C, D, E, A]),
        ];
        let d = dowdall(&rs).unwrap();
        let b = borda(&rs).unwrap();
        assert_eq!(d.entries[0], (f(A), q(16, 5)));
        assert_eq!(d.entries[1], (f(B), q(5, 2)));
        assert_eq!(b.entries[0], (f(B), q(7, 1)));
        assert_eq!(b.entries[1], (f(A), q(8, 1)));
    }

    #[test]
    fn single_ranking_is_identity() {
        let r = ranking("m", &[C, A, D, B]);
        assert_eq!(top_k(&dowdall(std::slice::from_ref(&r)).unwrap(), 4).unwrap(), r.features());
        assert_eq!(top_k(&borda(std::slice::from_ref(&r)).unwrap(), 4).unwrap(), r.features());
    }

    #[test]
    fn universe_mismatch_and_k() {
        let rs = [ranking("1", &[A, B]), ranking("2", &[A, C])];
        assert!(matches!(dowdall(&rs), Err(Error::UniverseMismatch(_))));
        let v = dowdall(&rs[..1]).unwrap();
        assert!(matches!(top_k(&v, 3), Err(Error::KTooLarge { k: 3, len: 2 })));
        assert_eq!(top_k(&v, 2).unwrap().len(), 2);
        assert!(dowdall(&[]).is_err());
    }

    #[test]
    fn variable_merge_sums_indices() {
        let records = [rec("m", "sum(sum(v_1(S)))", 0.2), rec("m", "sum(sum(v_3(S)))", -0.3)];
        let r = model_feature_ranking(&records, "m", false).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].0.merged_name(), "sum(sum(v_i(S)))");
        assert!((r.entries[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn proportional_merge_example() {
        let records = [rec("m", "sum(max(v_2(S)))", 0.4), rec("m", "avg(max(v_1(S)))", 0.1)];
        assert_eq!(model_feature_ranking(&records, "m", false).unwrap().entries.len(), 2);
        let r = model_feature_ranking(&records, "m", true).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].0.merged_name(), "sum(max(v_i(S)))");
        assert!((r.entries[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ties_are_lexicographic_and_recorded() {
        let records = [rec("m", "sum(sum(v_1(S)))", 1.0), rec("m", "max(max(v_1(S)))", 1.0)];
        let r = model_feature_ranking(&records, "m", false).unwrap();
        assert_eq!(r.entries[0].0.merged_name(), "max(max(v_i(S)))");
        assert_eq!(r.ties, vec![(f("MaxMaxV"), f("SumSumV"))]);
    }

    #[test]
    fn loader_validates() {
        let ok = "model,class,instance,feature,shap_value\nMLP,5,17,sum(max(v_1(S))),-0.25\n";
        let recs = load_shap_csv(ok.as_bytes()).unwrap();
        assert_eq!(recs[0].feature.name(), "sum(max(v_1(S)))");
        assert_eq!(recs[0].class_label, 5);
        // value-identical spelling maps to the canonical name
        let alt = "model,class,instance,feature,shap_value\nMLP,1,1,sum(max(sg(v_2(S)))),1\n";
        assert_eq!(load_shap_csv(alt.as_bytes()).unwrap()[0].feature.name(), "sum(sg(sum(v_2(S))))");
        for bad in [
            "model,class,instance,shap_value\nMLP,1,1,1\n",
            "model,class,instance,feature,shap_value\nMLP,1,1,bogus,1\n",
            "model,class,instance,feature,shap_value\nMLP,1,1,sum(max(v_i(S))),1\n",
            "model,class,instance,feature,shap_value\nMLP,x,1,sum(max(v_1(S))),1\n",
            "model,class,instance,feature,shap_value\nMLP,0,1,sum(max(v_1(S))),1\n",
        ] {
            assert!(load_shap_csv(bad.as_bytes()).is_err(), "{bad}");
        }
        assert!(matches!(raw_scores(&recs, "SVM"), Err(Error::EmptyRecords(_))));
    }

    fn arb_rankings() -> impl Strategy<Value = Vec<Vec<usize>>> {
        let perm = Just((0..5).collect::<Vec<usize>>()).prop_shuffle();
        prop::collection::vec(perm, 1..6)
    }

    fn to_rankings(perms: &[Vec<usize>]) -> Vec<FeatureRanking> {
        let names = [A, B, C, D, E];
        perms
            .iter()
            .enumerate()
            .map(|(i, p)| ranking(&i.to_string(), &p.iter().map(|&k| names[k]).collect::<Vec<_>>()))
            .collect()
    }

    fn harmonic(k: usize) -> BigRational {
        (1..=k).map(|r| q(1, r as i64)).fold(BigRational::zero(), |a, x| a + x)
    }

    proptest! {
        #[test]
        fn voting_is_anonymous(perms in arb_rankings()) {
            let rs = to_rankings(&perms);
            let mut rev = rs.clone();
            rev.reverse();
            prop_assert_eq!(dowdall(&rs).unwrap().entries, dowdall(&rev).unwrap().entries);
            prop_assert_eq!(borda(&rs).unwrap().entries, borda(&rev).unwrap().entries);
        }

        #[test]
        fn unanimity(perms in arb_rankings(), first in 0usize..5) {
            let fixed: Vec<Vec<usize>> = perms.iter().map(|p| {
                let mut p: Vec<usize> = p.iter().copied().filter(|&k| k != first).collect();
                p.insert(0, first);
                p
            }).collect();
            let rs = to_rankings(&fixed);
            prop_assert_eq!(dowdall(&rs).unwrap().entries[0].0, rs[0].entries[0].0);
            prop_assert_eq!(borda(&rs).unwrap().entries[0].0, rs[0].entries[0].0);
        }

        #[test]
        fn dowdall_conserves_weight(perms in arb_rankings()) {
            let rs = to_rankings(&perms);
            let total = dowdall(&rs).unwrap().entries.into_iter().fold(BigRational::zero(), |a, (_, s)| a + s);
            prop_assert_eq!(total, harmonic(5) * BigRational::from_integer(rs.len().into()));
            let penalty = borda(&rs).unwrap().entries.into_iter().fold(BigRational::zero(), |a, (_, s)| a + s);
            prop_assert_eq!(penalty, BigRational::from_integer((15 * rs.len()).into()));
        }

        #[test]
        fn scaling_preserves_order(values in prop::collection::vec(0.01f64..10.0, 9), c in 0.1f64..100.0) {
            let names = ["sum(max(v_1(S)))", "avg(avg(v_2(S)))", "max(sum(sv_3(S)))"];
            let recs: Vec<_> = values.iter().enumerate().map(|(i, &x)| rec("m", names[i % 3], x)).collect();
            let scaled: Vec<_> = recs.iter().map(|r| ShapRecord { shap_value: r.shap_value * c, ..r.clone() }).collect();
            let a = model_feature_ranking(&recs, "m", true).unwrap();
            let b = model_feature_ranking(&scaled, "m", true).unwrap();
            for ((_, sa), (_, sb)) in a.entries.iter().zip(&b.entries) {
                prop_assert!((sa * c - sb).abs() <= 1e-9 * sb.abs().max(1.0));
            }
            // order can only differ where scores are within rounding of each other
            let gaps_ok = a.entries.windows(2).all(|w| (w[0].1 - w[1].1).abs() > 1e-9);
            if gaps_ok {
                prop_assert_eq!(a.features(), b.features());
            }
        }
    }
}
