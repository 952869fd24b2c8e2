//! Long-term state behind the state machines: the HSS/AuC (reached by the
//! AAA server over an already secured channel, modelled as a method call),
//! the subscriber's USIM, and the AAA server's own configuration.
//!
//! Both the HSS and the USIM count every SQN read/write so tests can prove
//! which protocol touches sequence numbers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::crypto::{
    aka_generate_vector, f2, f3, f4, resynchronize, verify_autn, Amf, AuthVector, Autn, AutnError,
    AkaResponse, Auts, CryptoError, CurveParams, EcKeyPair, EcPoint, HssSqn, Sqn, SqnState,
    SubscriberKey, Tag,
};

use super::identity::{Identity, Imsi};
use super::keys::{hss_binding, hss_mac, Nonce};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("unknown subscriber")]
    UnknownSubscriber,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// Material the HSS hands to the AAA server for one ECDH-AKA run.
#[derive(Debug, Clone)]
pub struct EcdhMaterial {
    pub rand: [u8; 16],
    pub xres: [u8; 8],
    pub ck: [u8; 16],
    pub ik: [u8; 16],
    pub mac_k: Tag,
}

#[derive(Clone)]
struct Subscriber {
    k: SubscriberKey,
    sqn: HssSqn,
}

#[derive(Clone, Default)]
struct HssState {
    subscribers: HashMap<Imsi, Subscriber>,
    sqn_ops: u64,
    vectors_issued: u64,
}

/// Shared handle; clones refer to the same database. Use
/// [`HssHandle::deep_clone`] for an independent copy.
#[derive(Clone, Default)]
pub struct HssHandle(Arc<Mutex<HssState>>);

impl HssHandle {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, HssState> {
        self.0.lock().expect("HSS mutex poisoned")
    }

    pub fn provision(&self, imsi: Imsi, k: SubscriberKey, sqn: Sqn) {
        self.lock().subscribers.insert(imsi, Subscriber { k, sqn: HssSqn { current: sqn } });
    }

    pub fn deep_clone(&self) -> Self {
        HssHandle(Arc::new(Mutex::new(self.lock().clone())))
    }

    /// Number of SQN reads/writes performed so far.
    pub fn sqn_ops(&self) -> u64 {
        self.lock().sqn_ops
    }

    pub fn vectors_issued(&self) -> u64 {
        self.lock().vectors_issued
    }

    pub fn current_sqn(&self, imsi: &Imsi) -> Option<Sqn> {
        self.lock().subscribers.get(imsi).map(|s| s.sqn.current)
    }

    pub fn aka_vector<R: RngCore + ?Sized>(&self, imsi: &Imsi, rng: &mut R) -> Result<AuthVector, BackendError> {
        let mut st = self.lock();
        let sub = st.subscribers.get_mut(imsi).ok_or(BackendError::UnknownSubscriber)?;
        let sqn = sub.sqn.advance();
        let k = sub.k;
        st.sqn_ops += 1;
        st.vectors_issued += 1;
        Ok(aka_generate_vector(&k, sqn, Amf::default(), rng.gen()))
    }

    pub fn resync(&self, imsi: &Imsi, rand: &[u8; 16], auts: &Auts) -> Result<Sqn, BackendError> {
        let mut st = self.lock();
        let sub = st.subscribers.get_mut(imsi).ok_or(BackendError::UnknownSubscriber)?;
        let k = sub.k;
        let out = resynchronize(auts, rand, &k, &mut sub.sqn)?;
        st.sqn_ops += 1;
        Ok(out)
    }

    /// Challenge material for the ECDH method. No sequence number is read
    /// or written: freshness comes from the nonces and ephemeral keys.
    pub fn ecdh_material<R: RngCore + ?Sized>(
        &self,
        imsi: &Imsi,
        cpub: &[u8],
        spub: &[u8],
        nonce_p: &Nonce,
        nonce_s: &Nonce,
        rng: &mut R,
    ) -> Result<EcdhMaterial, BackendError> {
        let mut st = self.lock();
        let k = st.subscribers.get(imsi).ok_or(BackendError::UnknownSubscriber)?.k;
        st.vectors_issued += 1;
        let rand: [u8; 16] = rng.gen();
        Ok(EcdhMaterial {
            mac_k: hss_mac(&k, &rand, &hss_binding(cpub, spub, &rand, nonce_p, nonce_s)),
            xres: f2(&k, &rand),
            ck: f3(&k, &rand),
            ik: f4(&k, &rand),
            rand,
        })
    }
}

/// Subscriber side: long-term key, SQN window, and the current pseudonym.
#[derive(Clone, Debug)]
pub struct Usim {
    pub imsi: Imsi,
    pub k: SubscriberKey,
    sqn: SqnState,
    pseudonym: Option<Identity>,
    sqn_ops: u64,
}

impl Usim {
    pub fn new(imsi: Imsi, k: SubscriberKey, last_accepted: Sqn) -> Self {
        Usim {
            imsi,
            k,
            sqn: SqnState::new(last_accepted),
            pseudonym: None,
            sqn_ops: 0,
        }
    }

    pub fn sqn_ops(&self) -> u64 {
        self.sqn_ops
    }

    pub fn last_accepted(&self) -> Sqn {
        self.sqn.last_accepted
    }

    pub fn pseudonym(&self) -> Option<&Identity> {
        self.pseudonym.as_ref()
    }

    pub fn set_pseudonym(&mut self, id: Identity) {
        self.pseudonym = Some(id);
    }

    /// Moves the window forward as if the USIM had accepted `sqn`
    /// elsewhere (used to provoke desynchronisation).
    pub fn force_sqn(&mut self, sqn: Sqn) {
        self.sqn.last_accepted = sqn;
    }

    pub fn verify_autn(&mut self, rand: &[u8; 16], autn: &Autn) -> Result<AkaResponse, AutnError> {
        self.sqn_ops += 1;
        verify_autn(&self.k, rand, autn, &mut self.sqn)
    }

    /// RES, CK, IK without any freshness check.
    pub fn challenge_response(&self, rand: &[u8; 16]) -> ([u8; 8], [u8; 16], [u8; 16]) {
        (f2(&self.k, rand), f3(&self.k, rand), f4(&self.k, rand))
    }
}

/// AAA server configuration plus the pseudonym registry it owns.
#[derive(Clone)]
pub struct AaaServer {
    pub server_id: String,
    pub hss: HssHandle,
    pub curve: Arc<CurveParams>,
    epoch: EcKeyPair,
    pseudonyms: Arc<Mutex<HashMap<Identity, Imsi>>>,
    /// Ask for the permanent identity instead of any identity.
    pub request_permanent_id: bool,
}

impl AaaServer {
    pub fn new<R: RngCore + ?Sized>(
        server_id: impl Into<String>,
        hss: HssHandle,
        curve: Arc<CurveParams>,
        rng: &mut R,
    ) -> Self {
        let epoch = EcKeyPair::generate(&curve, rng);
        AaaServer {
            server_id: server_id.into(),
            hss,
            curve,
            epoch,
            pseudonyms: Arc::default(),
            request_permanent_id: false,
        }
    }

    /// Fresh epoch key pair `(b, bP)`.
    pub fn rotate_epoch<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        self.epoch = EcKeyPair::generate(&self.curve, rng);
    }

    pub fn epoch_key(&self) -> &EcKeyPair {
        &self.epoch
    }

    pub fn epoch_public(&self) -> &EcPoint {
        &self.epoch.public
    }

    pub fn register_pseudonym(&self, id: Identity, imsi: Imsi) {
        self.pseudonyms.lock().expect("registry mutex poisoned").insert(id, imsi);
    }

    pub fn resolve_pseudonym(&self, id: &Identity) -> Option<Imsi> {
        self.pseudonyms.lock().expect("registry mutex poisoned").get(id).cloned()
    }

    /// Independent copy of the HSS and registry, for forking a run.
    pub fn deep_clone(&self) -> Self {
        AaaServer {
            hss: self.hss.deep_clone(),
            pseudonyms: Arc::new(Mutex::new(self.pseudonyms.lock().expect("registry mutex poisoned").clone())),
            ..self.clone()
        }
    }
}

/// Peer-side knowledge of an AAA server it may authenticate to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownServer {
    pub server_id: String,
    pub ap_ids: Vec<String>,
}

/// Everything the ECDH peer needs besides its USIM.
#[derive(Debug, Clone)]
pub struct PeerConfig {
    pub curve: Arc<CurveParams>,
    pub known_servers: Vec<KnownServer>,
}

impl PeerConfig {
    pub fn accepts(&self, server_id: &[u8], ap_id: &[u8]) -> bool {
        self.known_servers
            .iter()
            .any(|s| s.server_id.as_bytes() == server_id && s.ap_ids.iter().any(|a| a.as_bytes() == ap_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn vectors_verify_on_matching_usim_and_count_sqn_ops() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let hss = HssHandle::new();
        let imsi = Imsi::numbered(1);
        let k = SubscriberKey::random(&mut rng);
        hss.provision(imsi.clone(), k, Sqn::new(10));
        let mut usim = Usim::new(imsi.clone(), k, Sqn::new(10));
        let av = hss.aka_vector(&imsi, &mut rng).unwrap();
        let r = usim.verify_autn(&av.rand, &av.autn).unwrap();
        assert_eq!(r.res, av.xres);
        assert_eq!(hss.sqn_ops(), 1);
        assert_eq!(usim.sqn_ops(), 1);
        assert_eq!(
            hss.aka_vector(&Imsi::numbered(2), &mut rng),
            Err(BackendError::UnknownSubscriber)
        );
    }

    #[test]
    fn deep_clone_is_independent() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let hss = HssHandle::new();
        let imsi = Imsi::numbered(1);
        hss.provision(imsi.clone(), SubscriberKey::random(&mut rng), Sqn::new(0));
        let copy = hss.deep_clone();
        hss.aka_vector(&imsi, &mut rng).unwrap();
        assert_eq!(hss.current_sqn(&imsi), Some(Sqn::new(1)));
        assert_eq!(copy.current_sqn(&imsi), Some(Sqn::new(0)));
        let shared = hss.clone();
        shared.aka_vector(&imsi, &mut rng).unwrap();
        assert_eq!(hss.current_sqn(&imsi), Some(Sqn::new(2)));
    }

    #[test]
    fn ecdh_material_touches_no_sqn() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let hss = HssHandle::new();
        let imsi = Imsi::numbered(1);
        hss.provision(imsi.clone(), SubscriberKey::random(&mut rng), Sqn::new(0));
        hss.ecdh_material(&imsi, b"a", b"b", &[0; 16], &[1; 16], &mut rng).unwrap();
        assert_eq!(hss.sqn_ops(), 0);
        assert_eq!(hss.current_sqn(&imsi), Some(Sqn::new(0)));
    }
}
