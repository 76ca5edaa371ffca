//! Deterministic synthetic corpus shaped like the human-annotated release:
//! the same per-domain, per-depth revision and edit counts and the same
//! intention totals, with three raw labels per edit. Used as a stand-in
//! when the released data is unavailable.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Domain, EditAction, EditIntention, EditOp, Granularity, LabeledAction, Revision};

pub const FIXTURE_SEED: u64 = 20220522;

/// `(domain, depth, revisions, edits)` of the human-annotated release.
pub const HUMAN_DEPTH_TABLE: &[(Domain, u32, usize, usize)] = &[
    (Domain::ArXiv, 1, 95, 618),
    (Domain::ArXiv, 2, 76, 499),
    (Domain::ArXiv, 3, 6, 47),
    (Domain::ArXiv, 4, 1, 13),
    (Domain::Wikipedia, 1, 130, 1072),
    (Domain::Wikipedia, 2, 38, 250),
    (Domain::Wikipedia, 3, 10, 98),
    (Domain::Wikipedia, 4, 1, 12),
    (Domain::Wikinews, 1, 173, 1227),
    (Domain::Wikinews, 2, 25, 155),
    (Domain::Wikinews, 3, 4, 27),
];

/// Intention totals of the human-annotated release.
pub const HUMAN_INTENT_COUNTS: &[(EditIntention, usize)] = &[
    (EditIntention::Fluency, 942),
    (EditIntention::Coherence, 393),
    (EditIntention::Clarity, 1601),
    (EditIntention::Style, 128),
    (EditIntention::MeaningChanged, 896),
    (EditIntention::Other, 58),
];

/// Share of edits rendered with another intention's surface pattern.
const PATTERN_NOISE: f64 = 0.12;

// `[orig|rev]` marks the edited span; `{n}` draws a number.
const FLUENCY: &[&str] = &[
    "She went to the [markt|market] on Sunday.",
    "The results [is|are] reported in the appendix.",
    "We [recieve|receive] the data from two sources.",
    "The experiment [occured|occurred] in {n} stages.",
    "This approach works well for [english|English] texts.",
    "The authors [has|have] released the code.",
    "It was difficult to [acheive|achieve] stable training.",
    "The model [were|was] trained for {n} epochs.",
    "The city is located in [|the ]north of the region.",
    "We thank the reviewers for [there|their] comments.",
    "The data was split into [seperate|separate] parts.",
    "Results improved[|,] as shown in the table.",
    "The team waited [untill|until] the final vote.",
    "He said [teh|the] bridge would reopen.",
    "[the|The] committee approved the plan.",
];

const COHERENCE: &[&str] = &[
    "[She|Therefore, she] is successful.",
    "[The|However, the] method fails on long documents.",
    "[It|As a result, it] was closed for a week.",
    "[We|In addition, we] report the variance of each run.",
    "The approach is simple[.| and] it scales well.",
    "[This|This approach] reduces the error rate.",
    "[The model|It] is evaluated on three domains.",
    "[Prices|Meanwhile, prices] kept rising.",
    "[In contrast, the|The] baseline ignores the context.",
    "[The station|Consequently, the station] closed early.",
];

const CLARITY: &[&str] = &[
    "The changes [made the paper better than before|improved the paper].",
    "We use a sampler [in order to|to] reduce the variance.",
    "[A large number of|Many] users reported the issue.",
    "The run failed [due to the fact that|because] the disk was full.",
    "The network [is able to|can] recover the signal.",
    "We [make use of|use] a pretrained encoder.",
    "The results are [very |]consistent across seeds.",
    "[At this point in time|Currently], the service is offline.",
    "The method is [kind of |]robust to noise.",
    "The [big|substantial] gain comes from pretraining.",
    "The council [put forward|proposed] a new budget.",
    "The river [goes through|crosses] the old town.",
    "We [carry out|conduct] {n} experiments on each corpus.",
    "The proposed [thing|module] filters noisy edits.",
    "[It is clear that the|The] model overfits the training data.",
    "The players [gave their approval to|approved] the new contract.",
];

const STYLE: &[&str] = &[
    "Everything was [|awfully ]rotten.",
    "The performance is [good|excellent] on every benchmark.",
    "The weather was [bad|dreadful] during the match.",
    "The crowd was [happy|jubilant] after the win.",
    "The castle is [|truly ]a remarkable building.",
    "We [got|obtained] similar numbers on the second run.",
    "The film received [a lot of|considerable] praise.",
    "The result is [|remarkably ]stable.",
];

const MEANING: &[&str] = &[
    "This method improves the accuracy from 64% to [78|83]%.",
    "The meeting took place on [Monday|Tuesday].",
    "The bridge was built in [1923|1925].",
    "The town has a population of [{n}|{m}] people.",
    "The study was conducted in [Paris|Berlin].",
    "We train on [three|four] datasets.",
    "The company hired [{n}|{m}] new engineers.",
    "The mayor [resigned|was re-elected] last year.",
    "The dataset covers [news articles|news articles and blog posts].",
    "The vote was postponed [|until after the elections].",
];

const MEANING_SENTENCES: &[&str] = &[
    "The new release adds support for {n} languages. ",
    "Police confirmed that {n} people were injured. ",
    "We also report results on a held-out test set of {n} documents. ",
    "The museum reopened to the public in {m}. ",
    "A follow-up study found no significant difference. ",
];

const OTHER: &[&str] = &[
    "This method is also named as [CITATION1 |]in the literature.",
    "The river floods every spring[ [3]|].",
    "See the discussion [{{cite web}}|] for details.",
    "The figure [(FIGURE2) |]summarizes the pipeline.",
    "The table lists all [REF12 |]baselines.",
];

const FILLER_ARXIV: &[&str] = &[
    "We evaluate the proposed model on {n} benchmarks.",
    "Our encoder is trained with a contrastive objective.",
    "The corpus contains documents from several domains.",
    "Ablations show that each component contributes to the gain.",
    "Training takes about {n} hours on a single machine.",
    "We release our code and data for future research.",
];

const FILLER_WIKIPEDIA: &[&str] = &[
    "The village lies on the eastern bank of the river.",
    "It was founded in the {n}th century by local merchants.",
    "The church was rebuilt after a fire.",
    "The region is known for its vineyards.",
    "The railway station opened in {m}.",
    "Several historic buildings survive in the old town.",
];

const FILLER_WIKINEWS: &[&str] = &[
    "Officials said the road would reopen next week.",
    "The announcement was made at a press conference.",
    "Emergency services arrived shortly after noon.",
    "The vote is expected to take place in {m}.",
    "Local residents expressed concern about the plan.",
    "The report was published on Thursday.",
];

/// A random template from `bank` with its number slots filled.
fn fill<R: Rng>(rng: &mut R, bank: &[&str]) -> String {
    let template = *bank.choose(rng).unwrap();
    let n = rng.random_range(2..90).to_string();
    let m = rng.random_range(1900..2021).to_string();
    template.replace("{n}", &n).replace("{m}", &m)
}

/// One sentence of the document; `depth` 0 never changes.
#[derive(Debug, Clone)]
struct Piece {
    prefix: String,
    orig: String,
    rev: String,
    suffix: String,
    depth: u32,
    granularity: Granularity,
    intention: Option<EditIntention>,
    raw: Vec<EditIntention>,
    rounds: Vec<u8>,
}

impl Piece {
    fn filler(text: String) -> Self {
        Piece {
            prefix: text,
            orig: String::new(),
            rev: String::new(),
            suffix: String::new(),
            depth: 0,
            granularity: Granularity::SentenceLevel,
            intention: None,
            raw: Vec::new(),
            rounds: Vec::new(),
        }
    }

    fn span(&self, version: u32) -> &str {
        if self.depth != 0 && self.depth <= version {
            &self.rev
        } else {
            &self.orig
        }
    }

    /// Whole-sentence and paragraph edits carry no prefix or suffix, so an
    /// empty span removes the sentence.
    fn render(&self, version: u32) -> String {
        format!("{}{}{}", self.prefix, self.span(version), self.suffix)
    }
}

fn parse_marked(s: &str) -> (String, String, String, String) {
    let open = s.find('[').expect("pattern has a span");
    let bar = open + s[open..].find('|').expect("pattern has a separator");
    let close = bar + s[bar..].find(']').expect("pattern is closed");
    (
        s[..open].to_string(),
        s[open + 1..bar].to_string(),
        s[bar + 1..close].to_string(),
        s[close + 1..].to_string(),
    )
}

fn edit_piece<R: Rng>(rng: &mut R, intention: EditIntention, depth: u32, filler: &[&str]) -> Piece {
    let surface = if rng.random_bool(PATTERN_NOISE) {
        *EditIntention::ALL.choose(rng).unwrap()
    } else {
        intention
    };
    let bank = match surface {
        EditIntention::Fluency => FLUENCY,
        EditIntention::Coherence => COHERENCE,
        EditIntention::Clarity => CLARITY,
        EditIntention::Style => STYLE,
        EditIntention::MeaningChanged => MEANING,
        EditIntention::Other => OTHER,
    };
    let mut piece = Piece::filler(String::new());
    piece.depth = depth;
    piece.intention = Some(intention);
    let whole = surface == EditIntention::MeaningChanged && rng.random_bool(0.3);
    if whole {
        let sentence = fill(rng, MEANING_SENTENCES);
        if rng.random_bool(0.15) {
            // a new paragraph ahead of the current one
            let second = fill(rng, filler);
            piece.rev = format!("{}{second}\n\n", sentence);
            piece.granularity = Granularity::DocumentLevel;
        } else if rng.random_bool(0.7) {
            piece.rev = sentence;
            piece.granularity = Granularity::ParagraphLevel;
        } else {
            piece.orig = sentence;
            piece.granularity = Granularity::ParagraphLevel;
        }
    } else {
        let marked = fill(rng, bank);
        let (prefix, orig, rev, suffix) = parse_marked(&marked);
        piece.prefix = prefix;
        piece.orig = orig;
        piece.rev = rev;
        piece.suffix = format!("{suffix} ");
    }
    piece
}

/// Confusion partners annotators tend to pick instead of the gold label.
fn confusable(l: EditIntention) -> &'static [EditIntention] {
    use EditIntention::*;
    match l {
        Fluency => &[Clarity, Clarity, Style, Coherence],
        Coherence => &[Clarity, Clarity, Fluency, MeaningChanged],
        Clarity => &[Fluency, Style, Coherence, MeaningChanged],
        Style => &[Clarity, Clarity, Fluency, MeaningChanged],
        MeaningChanged => &[Clarity, Clarity, Coherence, Other],
        Other => &[MeaningChanged, Clarity, Fluency],
    }
}

fn annotator_agreement(domain: Domain) -> f64 {
    match domain {
        Domain::ArXiv => 0.70,
        Domain::Wikipedia => 0.66,
        _ => 0.74,
    }
}

/// Three crowd labels, plus three expert labels when the crowd has no
/// majority. A crowd majority never contradicts the gold label.
fn raw_labels<R: Rng>(rng: &mut R, gold: EditIntention, domain: Domain) -> (Vec<EditIntention>, Vec<u8>) {
    let p = annotator_agreement(domain);
    let draw = |rng: &mut R, p: f64| {
        if rng.random_bool(p) {
            gold
        } else {
            *confusable(gold).choose(rng).unwrap()
        }
    };
    loop {
        let first: Vec<EditIntention> = (0..3).map(|_| draw(rng, p)).collect();
        match crate::annotation::majority_vote(&first) {
            Some(m) if m != gold => continue,
            Some(_) => return (first, vec![1; 3]),
            None => {
                let mut labels = first;
                let mut expert: Vec<EditIntention> = (0..3).map(|_| draw(rng, 0.85)).collect();
                if crate::annotation::majority_vote(&expert) != Some(gold) {
                    expert[0] = gold;
                    expert[1] = gold;
                }
                labels.extend(expert);
                return (labels, vec![1, 1, 1, 2, 2, 2]);
            }
        }
    }
}

/// Splits `total` into `parts` positive counts.
fn spread<R: Rng>(rng: &mut R, total: usize, parts: usize) -> Vec<usize> {
    assert!(total >= parts && parts > 0);
    let mut counts = vec![1usize; parts];
    for _ in 0..total - parts {
        counts[rng.random_range(0..parts)] += 1;
    }
    counts
}

fn render(paragraphs: &[Vec<Piece>], version: u32) -> String {
    paragraphs
        .iter()
        .map(|p| p.iter().map(|s| s.render(version)).collect::<String>())
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn revision_at(doc_id: &str, domain: Domain, paragraphs: &[Vec<Piece>], depth: u32) -> Revision {
    let mut actions = Vec::new();
    let (mut src, mut tgt) = (0usize, 0usize);
    let mut first = true;
    for (pi, para) in paragraphs.iter().enumerate() {
        if !first {
            src += 2;
            tgt += 2;
        }
        first = false;
        for piece in para {
            let pre = piece.prefix.chars().count();
            if piece.depth == depth {
                let o = piece.orig.chars().count();
                let r = piece.rev.chars().count();
                let op = EditOp::from_spans(&piece.orig, &piece.rev).expect("edit spans differ");
                let mut la = LabeledAction::labeled(
                    EditAction {
                        op,
                        granularity: piece.granularity,
                        original: piece.orig.clone(),
                        revised: piece.rev.clone(),
                        src_range: src + pre..src + pre + o,
                        tgt_range: tgt + pre..tgt + pre + r,
                        sentence_index: None,
                        paragraph_index: Some(pi),
                    },
                    piece.intention.expect("edit pieces carry a label"),
                );
                la.raw_labels = piece.raw.clone();
                la.label_rounds = piece.rounds.clone();
                actions.push(la);
            }
            let suf = piece.suffix.chars().count();
            src += pre + piece.span(depth - 1).chars().count() + suf;
            tgt += pre + piece.span(depth).chars().count() + suf;
        }
    }
    Revision {
        doc_id: doc_id.to_string(),
        depth,
        source_text: render(paragraphs, depth - 1),
        target_text: render(paragraphs, depth),
        actions,
        domain,
    }
}

/// The full fixture, ordered by domain, document and depth.
pub fn human_like_corpus(seed: u64) -> Vec<Revision> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<EditIntention> = HUMAN_INTENT_COUNTS
        .iter()
        .flat_map(|&(l, n)| std::iter::repeat_n(l, n))
        .collect();
    labels.shuffle(&mut rng);
    let mut labels = labels.into_iter();

    let mut out = Vec::new();
    for domain in [Domain::ArXiv, Domain::Wikipedia, Domain::Wikinews] {
        let rows: Vec<&(Domain, u32, usize, usize)> = HUMAN_DEPTH_TABLE.iter().filter(|r| r.0 == domain).collect();
        let docs = rows.iter().find(|r| r.1 == 1).map_or(0, |r| r.2);
        let filler = match domain {
            Domain::ArXiv => FILLER_ARXIV,
            Domain::Wikipedia => FILLER_WIKIPEDIA,
            _ => FILLER_WIKINEWS,
        };
        // edits per (doc, depth); doc i reaches depth d iff i < count(d)
        let mut plan: Vec<Vec<usize>> = vec![Vec::new(); docs];
        for &&(_, _, n, e) in &rows {
            for (i, k) in spread(&mut rng, e, n).into_iter().enumerate() {
                plan[i].push(k);
            }
        }
        for (i, per_depth) in plan.iter().enumerate() {
            let doc_id = format!("{}-{:04}", domain.as_str(), i + 1);
            let mut pieces: Vec<Piece> = Vec::new();
            for (d, &k) in per_depth.iter().enumerate() {
                for _ in 0..k {
                    let gold = labels.next().expect("label pool matches edit total");
                    let mut p = edit_piece(&mut rng, gold, d as u32 + 1, filler);
                    let (raw, rounds) = raw_labels(&mut rng, gold, domain);
                    p.raw = raw;
                    p.rounds = rounds;
                    pieces.push(p);
                }
            }
            let n_fill = rng.random_range(2..5) + pieces.len() / 3;
            for _ in 0..n_fill {
                pieces.push(Piece::filler(format!("{} ", fill(&mut rng, filler))));
            }
            pieces.shuffle(&mut rng);
            let paragraphs = paragraphs_of(&mut rng, pieces, filler);
            for d in 1..=per_depth.len() as u32 {
                out.push(revision_at(&doc_id, domain, &paragraphs, d));
            }
        }
    }
    out
}

/// Groups sentences into paragraphs. Paragraph insertions open their
/// paragraph and every paragraph ends with an unchanging sentence, so
/// sentence separators never dangle.
fn paragraphs_of<R: Rng>(rng: &mut R, pieces: Vec<Piece>, filler: &[&str]) -> Vec<Vec<Piece>> {
    let mut paragraphs: Vec<Vec<Piece>> = Vec::new();
    let mut current: Vec<Piece> = Vec::new();
    let close = |rng: &mut R, mut p: Vec<Piece>, out: &mut Vec<Vec<Piece>>| {
        p.push(Piece::filler(fill(rng, filler)));
        out.push(p);
    };
    for piece in pieces {
        let opens = piece.granularity == Granularity::DocumentLevel;
        if (opens && !current.is_empty()) || current.len() >= 5 {
            close(rng, std::mem::take(&mut current), &mut paragraphs);
        }
        current.push(piece);
    }
    close(rng, current, &mut paragraphs);
    paragraphs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::compute_stats;
    use crate::diff::apply_edits;

    #[test]
    fn counts_match_tables() {
        let corpus = human_like_corpus(FIXTURE_SEED);
        let stats = compute_stats(&corpus);
        for &(d, depth, n, e) in HUMAN_DEPTH_TABLE {
            let c = stats.cell(d, depth);
            assert_eq!((c.revisions, c.edits), (n as u64, e as u64), "{d:?} depth {depth}");
        }
        for &(l, n) in HUMAN_INTENT_COUNTS {
            assert_eq!(stats.count(l), n as u64);
        }
    }

    #[test]
    fn actions_reproduce_targets() {
        for r in human_like_corpus(7) {
            let acts: Vec<EditAction> = r.actions.iter().map(|a| a.action.clone()).collect();
            assert_eq!(apply_edits(&r.source_text, &acts).unwrap(), r.target_text, "{} d{}", r.doc_id, r.depth);
        }
    }
}
