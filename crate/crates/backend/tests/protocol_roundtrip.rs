use nerperturb_backend::protocol::*;
use proptest::prelude::*;

fn word() -> impl Strategy<Value = String> {
    "[A-Za-z0-9éü\\-]{1,8}"
}

fn finite() -> impl Strategy<Value = f64> {
    -1.0e6f64..1.0e6
}

#[derive(Debug, Clone)]
enum Message {
    NerReq(NerPredictRequest),
    NerResp(NerPredictResponse),
    FillReq(MaskFillRequest),
    FillResp(MaskFillResponse),
    ImpReq(ImportanceRequest),
    ImpResp(ImportanceResponse),
    EmbReq(EmbedRequest),
    EmbResp(EmbedResponse),
    Err(ErrorResponse),
}

fn message() -> impl Strategy<Value = Message> {
    let sents = prop::collection::vec(prop::collection::vec(word(), 0..6), 0..4);
    let tag = prop_oneof![Just("O".to_string()), "[BI]-[A-Z]{1,4}"];
    prop_oneof![
        sents.prop_map(|sentences| Message::NerReq(NerPredictRequest { sentences })),
        prop::collection::vec(prop::collection::vec(tag, 0..6), 0..4)
            .prop_map(|tags| Message::NerResp(NerPredictResponse { tags })),
        (prop::collection::vec(word(), 1..8), 0usize..8, 1usize..20).prop_map(|(tokens, i, k)| {
            Message::FillReq(MaskFillRequest {
                mask_index: i % tokens.len(),
                tokens,
                top_k: k,
            })
        }),
        prop::collection::vec((word(), finite()), 0..5).prop_map(|c| Message::FillResp(MaskFillResponse {
            candidates: c
                .into_iter()
                .map(|(token, score)| FillCandidate { token, score })
                .collect()
        })),
        (
            prop::collection::vec(word(), 0..8),
            prop::collection::vec(0usize..8, 0..3)
        )
            .prop_map(|(tokens, entity_indices)| Message::ImpReq(ImportanceRequest { tokens, entity_indices })),
        prop::collection::vec(finite(), 0..8).prop_map(|scores| Message::ImpResp(ImportanceResponse { scores })),
        prop::collection::vec("[a-z ]{0,20}", 0..4).prop_map(|texts| Message::EmbReq(EmbedRequest { texts })),
        prop::collection::vec(prop::collection::vec(finite(), 8), 0..3)
            .prop_map(|vectors| Message::EmbResp(EmbedResponse { vectors })),
        (word(), "[ -~]{0,30}").prop_map(|(code, message)| Message::Err(ErrorResponse {
            error: ErrorBody { code, message }
        })),
    ]
}

fn round_trip<T>(value: &T) -> T
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    serde_json::from_slice(&serde_json::to_vec(value).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn every_message_round_trips(m in message()) {
        match m {
            Message::NerReq(v) => prop_assert_eq!(round_trip(&v), v),
            Message::NerResp(v) => prop_assert_eq!(round_trip(&v), v),
            Message::FillReq(v) => prop_assert_eq!(round_trip(&v), v),
            Message::FillResp(v) => prop_assert_eq!(round_trip(&v), v),
            Message::ImpReq(v) => prop_assert_eq!(round_trip(&v), v),
            Message::ImpResp(v) => prop_assert_eq!(round_trip(&v), v),
            Message::EmbReq(v) => prop_assert_eq!(round_trip(&v), v),
            Message::EmbResp(v) => prop_assert_eq!(round_trip(&v), v),
            Message::Err(v) => prop_assert_eq!(round_trip(&v), v),
        }
    }
}
