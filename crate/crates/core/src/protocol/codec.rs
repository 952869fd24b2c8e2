//! EAP wire codec.
//!
//! ```text
//! code(1) | identifier(1) | length(2, BE)                      Success/Failure
//! code(1) | identifier(1) | length(2, BE) | method(1) | subtype(1) | reserved(2) | attributes*
//! attribute: id(1) | len(1, 4-byte words incl. header) | value
//! ```
//!
//! An attribute value is stored exactly as carried on the wire, so its
//! length is always `4k + 2`. [`Attribute::fixed`] and [`Attribute::variable`]
//! build values with a reserved or actual-length prefix followed by zero
//! padding; the matching accessors check that framing on the way out.

use thiserror::Error;

pub const AT_RAND: u8 = 1;
pub const AT_AUTN: u8 = 2;
pub const AT_RES: u8 = 3;
pub const AT_AUTS: u8 = 4;
pub const AT_PERMANENT_ID_REQ: u8 = 10;
pub const AT_MAC: u8 = 11;
pub const AT_ENCR_DATA: u8 = 12;
pub const AT_ANY_ID_REQ: u8 = 13;
pub const AT_IDENTITY: u8 = 14;
pub const AT_NONCE_P: u8 = 20;
pub const AT_NONCE_S: u8 = 21;
pub const AT_CPUB: u8 = 130;
pub const AT_SPUB: u8 = 131;
pub const AT_SERVER_ID: u8 = 132;
pub const AT_AP_ID: u8 = 133;
pub const AT_MAC_K: u8 = 134;

pub const SUBTYPE_CHALLENGE: u8 = 1;
pub const SUBTYPE_AUTH_REJECT: u8 = 2;
pub const SUBTYPE_SYNC_FAILURE: u8 = 4;
pub const SUBTYPE_IDENTITY: u8 = 5;
pub const SUBTYPE_CLIENT_ERROR: u8 = 14;

const HEADER_LEN: usize = 4;
const METHOD_HEADER_LEN: usize = 8;
const MAX_ATTR_VALUE: usize = 255 * 4 - 2;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CodecError {
    #[error("input truncated")]
    Truncated,
    #[error("length field inconsistent with contents")]
    BadLength,
    #[error("duplicate attribute {0}")]
    DuplicateAttr(u8),
    #[error("unknown EAP code {0}")]
    UnknownCode(u8),
    #[error("unknown EAP method {0}")]
    UnknownMethod(u8),
    #[error("reserved bits set")]
    NonZeroReserved,
    #[error("attribute framing invalid")]
    BadAttribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum EapCode {
    Request = 1,
    Response = 2,
    Success = 3,
    Failure = 4,
}

impl EapCode {
    fn from_u8(v: u8) -> Result<Self, CodecError> {
        match v {
            1 => Ok(EapCode::Request),
            2 => Ok(EapCode::Response),
            3 => Ok(EapCode::Success),
            4 => Ok(EapCode::Failure),
            other => Err(CodecError::UnknownCode(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Method {
    Aka = 23,
    EcdhAka = 254,
}

impl Method {
    fn from_u8(v: u8) -> Result<Self, CodecError> {
        match v {
            23 => Ok(Method::Aka),
            254 => Ok(Method::EcdhAka),
            other => Err(CodecError::UnknownMethod(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    id: u8,
    value: Vec<u8>,
}

fn pad_to_word(mut v: Vec<u8>) -> Vec<u8> {
    while !(v.len() + 2).is_multiple_of(4) {
        v.push(0);
    }
    v
}

impl Attribute {
    /// Raw wire value; `value.len()` must be `4k + 2` and at most 1018.
    pub fn raw(id: u8, value: Vec<u8>) -> Result<Self, CodecError> {
        if !(value.len() + 2).is_multiple_of(4) || value.len() > MAX_ATTR_VALUE {
            return Err(CodecError::BadAttribute);
        }
        Ok(Attribute { id, value })
    }

    /// Two reserved zero bytes, then `data`, then zero padding.
    pub fn fixed(id: u8, data: &[u8]) -> Self {
        let mut v = vec![0u8, 0u8];
        v.extend_from_slice(data);
        Attribute::raw(id, pad_to_word(v)).expect("fixed attribute fits")
    }

    /// Two-byte actual length, then `data`, then zero padding.
    pub fn variable(id: u8, data: &[u8]) -> Result<Self, CodecError> {
        let len = u16::try_from(data.len()).map_err(|_| CodecError::BadAttribute)?;
        let mut v = len.to_be_bytes().to_vec();
        v.extend_from_slice(data);
        Attribute::raw(id, pad_to_word(v))
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn value(&self) -> &[u8] {
        &self.value
    }

    /// Payload of a [`Attribute::fixed`] value carrying exactly `len` bytes.
    pub fn fixed_data(&self, len: usize) -> Result<&[u8], CodecError> {
        if self.value[..2] != [0, 0] || self.value.len() != (len + 2 + 2).div_ceil(4) * 4 - 2 {
            return Err(CodecError::BadAttribute);
        }
        let (data, pad) = self.value[2..].split_at(len);
        if pad.iter().any(|&b| b != 0) {
            return Err(CodecError::BadAttribute);
        }
        Ok(data)
    }

    /// Payload of a [`Attribute::variable`] value.
    pub fn variable_data(&self) -> Result<&[u8], CodecError> {
        let len = u16::from_be_bytes([self.value[0], self.value[1]]) as usize;
        if 2 + len > self.value.len() || pad_to_word(vec![0; 2 + len]).len() != self.value.len() {
            return Err(CodecError::BadAttribute);
        }
        let (data, pad) = self.value[2..].split_at(len);
        if pad.iter().any(|&b| b != 0) {
            return Err(CodecError::BadAttribute);
        }
        Ok(data)
    }

    fn wire_len(&self) -> usize {
        self.value.len() + 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodData {
    pub method: Method,
    pub subtype: u8,
    attributes: Vec<Attribute>,
}

impl MethodData {
    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attr(&self, id: u8) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EapMessage {
    pub code: EapCode,
    pub identifier: u8,
    data: Option<MethodData>,
}

impl EapMessage {
    pub fn success(identifier: u8) -> Self {
        EapMessage {
            code: EapCode::Success,
            identifier,
            data: None,
        }
    }

    pub fn failure(identifier: u8) -> Self {
        EapMessage {
            code: EapCode::Failure,
            identifier,
            data: None,
        }
    }

    pub fn request(
        identifier: u8,
        method: Method,
        subtype: u8,
        attributes: Vec<Attribute>,
    ) -> Result<Self, CodecError> {
        Self::with_method(EapCode::Request, identifier, method, subtype, attributes)
    }

    pub fn response(
        identifier: u8,
        method: Method,
        subtype: u8,
        attributes: Vec<Attribute>,
    ) -> Result<Self, CodecError> {
        Self::with_method(EapCode::Response, identifier, method, subtype, attributes)
    }

    fn with_method(
        code: EapCode,
        identifier: u8,
        method: Method,
        subtype: u8,
        attributes: Vec<Attribute>,
    ) -> Result<Self, CodecError> {
        for (i, a) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|b| b.id == a.id) {
                return Err(CodecError::DuplicateAttr(a.id));
            }
        }
        let total: usize = METHOD_HEADER_LEN + attributes.iter().map(Attribute::wire_len).sum::<usize>();
        if total > u16::MAX as usize {
            return Err(CodecError::BadLength);
        }
        Ok(EapMessage {
            code,
            identifier,
            data: Some(MethodData {
                method,
                subtype,
                attributes,
            }),
        })
    }

    pub fn data(&self) -> Option<&MethodData> {
        self.data.as_ref()
    }

    pub fn method(&self) -> Option<Method> {
        self.data.as_ref().map(|d| d.method)
    }

    pub fn subtype(&self) -> Option<u8> {
        self.data.as_ref().map(|d| d.subtype)
    }

    pub fn attr(&self, id: u8) -> Option<&Attribute> {
        self.data.as_ref().and_then(|d| d.attr(id))
    }

    pub fn encoded_len(&self) -> usize {
        match &self.data {
            None => HEADER_LEN,
            Some(d) => METHOD_HEADER_LEN + d.attributes.iter().map(Attribute::wire_len).sum::<usize>(),
        }
    }

    /// Copy with the value of attribute `id` overwritten by zeros, the form
    /// over which AT_MAC / AT_MAC_K are computed.
    pub fn zeroed(&self, id: u8) -> EapMessage {
        let mut out = self.clone();
        if let Some(d) = out.data.as_mut() {
            for a in d.attributes.iter_mut().filter(|a| a.id == id) {
                a.value.iter_mut().for_each(|b| *b = 0);
            }
        }
        out
    }

    /// Replaces an attribute in place, keeping its position.
    pub fn replace_attr(&mut self, attr: Attribute) -> bool {
        if let Some(d) = self.data.as_mut() {
            if let Some(slot) = d.attributes.iter_mut().find(|a| a.id == attr.id) {
                *slot = attr;
                return true;
            }
        }
        false
    }
}

pub fn encode_eap(msg: &EapMessage) -> Vec<u8> {
    let len = msg.encoded_len();
    let mut out = Vec::with_capacity(len);
    out.push(msg.code as u8);
    out.push(msg.identifier);
    out.extend_from_slice(&(len as u16).to_be_bytes());
    if let Some(d) = &msg.data {
        out.push(d.method as u8);
        out.push(d.subtype);
        out.extend_from_slice(&[0, 0]);
        for a in &d.attributes {
            out.push(a.id);
            out.push((a.wire_len() / 4) as u8);
            out.extend_from_slice(&a.value);
        }
    }
    out
}

pub fn decode_eap(bytes: &[u8]) -> Result<EapMessage, CodecError> {
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated);
    }
    let code = EapCode::from_u8(bytes[0])?;
    let identifier = bytes[1];
    let len = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
    if len < HEADER_LEN {
        return Err(CodecError::BadLength);
    }
    if bytes.len() < len {
        return Err(CodecError::Truncated);
    }
    if bytes.len() > len {
        return Err(CodecError::BadLength);
    }
    match code {
        EapCode::Success | EapCode::Failure => {
            if len != HEADER_LEN {
                return Err(CodecError::BadLength);
            }
            Ok(EapMessage {
                code,
                identifier,
                data: None,
            })
        }
        EapCode::Request | EapCode::Response => {
            if len < METHOD_HEADER_LEN {
                return Err(CodecError::BadLength);
            }
            let method = Method::from_u8(bytes[4])?;
            let subtype = bytes[5];
            if bytes[6] != 0 || bytes[7] != 0 {
                return Err(CodecError::NonZeroReserved);
            }
            let mut attributes: Vec<Attribute> = Vec::new();
            let mut pos = METHOD_HEADER_LEN;
            while pos < len {
                if len - pos < 2 {
                    return Err(CodecError::Truncated);
                }
                let id = bytes[pos];
                let words = bytes[pos + 1] as usize;
                if words == 0 {
                    return Err(CodecError::BadLength);
                }
                let end = pos + words * 4;
                if end > len {
                    return Err(CodecError::BadLength);
                }
                if attributes.iter().any(|a| a.id == id) {
                    return Err(CodecError::DuplicateAttr(id));
                }
                attributes.push(Attribute {
                    id,
                    value: bytes[pos + 2..end].to_vec(),
                });
                pos = end;
            }
            Ok(EapMessage {
                code,
                identifier,
                data: Some(MethodData {
                    method,
                    subtype,
                    attributes,
                }),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn success_is_four_bytes() {
        assert_eq!(encode_eap(&EapMessage::success(7)), vec![0x03, 0x07, 0x00, 0x04]);
        assert_eq!(decode_eap(&[0x03, 0x07, 0x00, 0x04]).unwrap(), EapMessage::success(7));
    }

    #[test]
    fn short_input_is_truncated() {
        assert_eq!(decode_eap(&[1, 2, 3]), Err(CodecError::Truncated));
        assert_eq!(decode_eap(&[1, 2, 0, 12, 23, 5, 0, 0]), Err(CodecError::Truncated));
    }

    #[test]
    fn header_errors() {
        assert_eq!(decode_eap(&[9, 0, 0, 4]), Err(CodecError::UnknownCode(9)));
        assert_eq!(decode_eap(&[3, 0, 0, 5, 0]), Err(CodecError::BadLength));
        assert_eq!(decode_eap(&[3, 0, 0, 4, 0]), Err(CodecError::BadLength));
        assert_eq!(decode_eap(&[1, 0, 0, 4]), Err(CodecError::BadLength));
        assert_eq!(decode_eap(&[1, 0, 0, 8, 99, 5, 0, 0]), Err(CodecError::UnknownMethod(99)));
        assert_eq!(decode_eap(&[1, 0, 0, 8, 23, 5, 0, 1]), Err(CodecError::NonZeroReserved));
    }

    #[test]
    fn attribute_errors() {
        // zero-length attribute
        assert_eq!(decode_eap(&[1, 0, 0, 12, 23, 5, 0, 0, 13, 0, 0, 0]), Err(CodecError::BadLength));
        // attribute overruns packet
        assert_eq!(decode_eap(&[1, 0, 0, 12, 23, 5, 0, 0, 13, 2, 0, 0]), Err(CodecError::BadLength));
        // dangling attribute byte
        assert_eq!(decode_eap(&[1, 0, 0, 9, 23, 5, 0, 0, 13]), Err(CodecError::Truncated));
        let dup = [1, 0, 0, 16, 23, 5, 0, 0, 13, 1, 0, 0, 13, 1, 0, 0];
        assert_eq!(decode_eap(&dup), Err(CodecError::DuplicateAttr(13)));
        assert_eq!(
            EapMessage::request(0, Method::Aka, 5, vec![Attribute::fixed(13, &[]), Attribute::fixed(13, &[])]),
            Err(CodecError::DuplicateAttr(13))
        );
    }

    #[test]
    fn typed_attribute_framing() {
        let f = Attribute::fixed(AT_RAND, &[7u8; 16]);
        assert_eq!(f.value().len(), 18);
        assert_eq!(f.fixed_data(16).unwrap(), &[7u8; 16]);
        assert!(f.fixed_data(15).is_err());
        let v = Attribute::variable(AT_IDENTITY, b"0310150123456789").unwrap();
        assert_eq!(v.value().len(), 18);
        assert_eq!(v.variable_data().unwrap(), b"0310150123456789");
        let v = Attribute::variable(AT_IDENTITY, b"abc").unwrap();
        assert_eq!(v.value().len(), 6);
        let mut bad = v.clone();
        bad.value[5] = 1;
        assert!(bad.variable_data().is_err());
        assert!(Attribute::raw(1, vec![0; 3]).is_err());
    }

    #[test]
    fn zeroing_keeps_layout() {
        let m = EapMessage::request(
            1,
            Method::Aka,
            SUBTYPE_CHALLENGE,
            vec![Attribute::fixed(AT_RAND, &[1; 16]), Attribute::fixed(AT_MAC, &[9; 16])],
        )
        .unwrap();
        let z = m.zeroed(AT_MAC);
        assert_eq!(encode_eap(&z).len(), encode_eap(&m).len());
        assert_eq!(z.attr(AT_MAC).unwrap().value(), &[0u8; 18]);
        assert_eq!(z.attr(AT_RAND), m.attr(AT_RAND));
    }

    fn arb_attribute() -> impl Strategy<Value = Attribute> {
        (any::<u8>(), 0usize..60).prop_flat_map(|(id, words)| {
            proptest::collection::vec(any::<u8>(), words * 4 + 2)
                .prop_map(move |value| Attribute::raw(id, value).unwrap())
        })
    }

    fn arb_message() -> impl Strategy<Value = EapMessage> {
        let method = prop_oneof![Just(Method::Aka), Just(Method::EcdhAka)];
        let body = (
            any::<bool>(),
            any::<u8>(),
            method,
            any::<u8>(),
            proptest::collection::vec(arb_attribute(), 0..12),
        )
            .prop_map(|(req, id, method, subtype, attrs)| {
                let mut seen = std::collections::HashSet::new();
                let attrs: Vec<_> = attrs.into_iter().filter(|a| seen.insert(a.id())).collect();
                if req {
                    EapMessage::request(id, method, subtype, attrs).unwrap()
                } else {
                    EapMessage::response(id, method, subtype, attrs).unwrap()
                }
            });
        prop_oneof![
            any::<u8>().prop_map(EapMessage::success),
            any::<u8>().prop_map(EapMessage::failure),
            body,
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn decode_inverts_encode(m in arb_message()) {
            let bytes = encode_eap(&m);
            prop_assert_eq!(bytes.len(), m.encoded_len());
            prop_assert_eq!(u16::from_be_bytes([bytes[2], bytes[3]]) as usize, bytes.len());
            prop_assert_eq!(decode_eap(&bytes).unwrap(), m);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            if let Ok(m) = decode_eap(&bytes) {
                prop_assert_eq!(encode_eap(&m), bytes);
            }
        }
    }
}
