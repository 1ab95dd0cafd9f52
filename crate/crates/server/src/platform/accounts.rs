use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use framewise_core::ids::{GroupId, UserId};
use framewise_core::workflow::Group;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{secret, sha256_hex, Platform, RandomIds, Result};
use crate::error::ApiError;
use crate::mail::Mail;
use crate::state::{AccountState, Challenge, CredentialKind, GroupState, Role, Session, UserAccount};

#[derive(Debug, Clone, Deserialize)]
pub struct SignupRequest {
    pub email: String,
    pub password: String,
    #[serde(default)]
    pub institution: String,
    #[serde(default)]
    pub project: String,
    #[serde(default)]
    pub contact: String,
}

/// An account as shown through the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserView {
    pub id: UserId,
    pub email: String,
    pub state: AccountState,
    pub roles: BTreeSet<Role>,
    pub institution: String,
    pub project: String,
    pub contact: String,
    pub private_group: Option<GroupId>,
    pub terms_accepted: Option<u32>,
}

impl From<&UserAccount> for UserView {
    fn from(u: &UserAccount) -> Self {
        UserView {
            id: u.id.clone(),
            email: u.email.clone(),
            state: u.state,
            roles: u.roles.clone(),
            institution: u.institution.clone(),
            project: u.project.clone(),
            contact: u.contact.clone(),
            private_group: u.private_group.clone(),
            terms_accepted: u.terms_accepted.map(|t| t.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionGrant {
    pub token: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum LoginStep {
    /// A code was mailed; complete with the challenge id.
    Challenge { challenge: String, expires_at: DateTime<Utc> },
    Session(SessionGrant),
}

fn valid_email(email: &str) -> bool {
    let Some((local, domain)) = email.split_once('@') else { return false };
    !local.is_empty() && domain.contains('.') && !email.chars().any(char::is_whitespace)
}

impl Platform {
    /// Register a Pending account. `password_hash` is a PHC string.
    pub fn signup(&mut self, req: &SignupRequest, password_hash: String) -> Result<UserView> {
        let email = req.email.trim().to_owned();
        if !valid_email(&email) {
            return Err(ApiError::Invalid("invalid email address".into()));
        }
        if self.state.user_by_email(&email).is_some() {
            return Err(ApiError::DuplicateEmail);
        }
        let account = UserAccount {
            id: RandomIds::make("u").into(),
            email,
            password_hash,
            state: AccountState::Pending,
            roles: BTreeSet::new(),
            institution: req.institution.clone(),
            project: req.project.clone(),
            contact: req.contact.clone(),
            created_at: self.now(),
            private_group: None,
            terms_accepted: None,
        };
        let view = UserView::from(&account);
        self.state.users.insert(account.id.clone(), account);
        self.commit()?;
        Ok(view)
    }

    /// Create an active administrator holding every role. Used to bootstrap
    /// a fresh deployment.
    pub fn create_admin(&mut self, email: &str, password_hash: String) -> Result<UserView> {
        let req = SignupRequest { email: email.into(), password: String::new(), institution: String::new(), project: String::new(), contact: String::new() };
        let view = self.signup(&req, password_hash)?;
        let user = self.state.users.get_mut(&view.id).expect("just created");
        user.roles = [Role::Administrator, Role::GroupCreator, Role::VideoUploader, Role::ProtocolManager, Role::ScriptUser].into();
        self.activate_account(&view.id)?;
        self.commit()?;
        Ok(UserView::from(&self.state.users[&view.id]))
    }

    /// Pending/Disabled -> Active; first activation creates the private group.
    pub(super) fn activate_account(&mut self, user: &UserId) -> Result<()> {
        let now = self.now();
        let account = self.state.users.get_mut(user).ok_or_else(|| ApiError::NotFound(format!("user {user}")))?;
        account.state = AccountState::Active;
        if account.private_group.is_none() {
            let gid = GroupId::from(RandomIds::make("g"));
            account.private_group = Some(gid.clone());
            let group = Group::private(gid.clone(), user.clone());
            self.state.groups.insert(gid, GroupState::new(group, now));
        }
        Ok(())
    }

    /// Hash to verify a login attempt against, plus the account id. Unknown
    /// emails are reported like wrong passwords.
    pub fn credentials(&self, email: &str) -> Result<(UserId, String)> {
        let u = self.state.user_by_email(email).ok_or(ApiError::BadCredentials)?;
        Ok((u.id.clone(), u.password_hash.clone()))
    }

    /// Second step of login, after the password checked out.
    pub fn begin_login(&mut self, user: &UserId) -> Result<LoginStep> {
        let account = self.state.user(user)?;
        if account.state != AccountState::Active {
            return Err(ApiError::AccountInactive);
        }
        if !self.state.settings.two_factor {
            let grant = self.issue(user, CredentialKind::Session, self.policy.session_ttl);
            self.commit()?;
            return Ok(LoginStep::Session(grant));
        }
        let email = account.email.clone();
        let now = self.now();
        let code = format!("{:06}", rand::rng().random_range(0..1_000_000u32));
        let id = RandomIds::make("c");
        let expires_at = now + self.policy.code_ttl;
        self.state.challenges.retain(|_, c| c.expires_at > now && !c.consumed);
        self.state.challenges.insert(
            id.clone(),
            Challenge { user: user.clone(), code_hash: sha256_hex(&format!("{id}:{code}")), issued_at: now, expires_at, consumed: false, attempts: 0 },
        );
        self.commit()?;
        let minutes = self.policy.code_ttl.num_minutes();
        self.mailer.send(Mail {
            to: email,
            subject: "Your login code".into(),
            body: format!("Your login code is {code}. It expires in {minutes} minutes and works once."),
        });
        Ok(LoginStep::Challenge { challenge: id, expires_at })
    }

    pub fn verify_code(&mut self, challenge: &str, code: &str) -> Result<SessionGrant> {
        let now = self.now();
        let max = self.policy.code_attempts;
        let c = self.state.challenges.get_mut(challenge).ok_or(ApiError::BadCode)?;
        if c.consumed {
            return Err(ApiError::CodeConsumed);
        }
        if now >= c.expires_at {
            return Err(ApiError::CodeExpired);
        }
        if c.attempts >= max {
            return Err(ApiError::TooManyAttempts);
        }
        if sha256_hex(&format!("{challenge}:{}", code.trim())) != c.code_hash {
            c.attempts += 1;
            let locked = c.attempts >= max;
            self.commit()?;
            return Err(if locked { ApiError::TooManyAttempts } else { ApiError::BadCode });
        }
        c.consumed = true;
        let user = c.user.clone();
        if self.state.user(&user)?.state != AccountState::Active {
            self.commit()?;
            return Err(ApiError::AccountInactive);
        }
        let grant = self.issue(&user, CredentialKind::Session, self.policy.session_ttl);
        self.commit()?;
        Ok(grant)
    }

    fn issue(&mut self, user: &UserId, kind: CredentialKind, ttl: Duration) -> SessionGrant {
        let now = self.now();
        let token = secret();
        let expires_at = now + ttl;
        let session = Session { id: RandomIds::make("s"), user: user.clone(), kind, created_at: now, expires_at };
        self.state.sessions.retain(|_, s| s.expires_at > now);
        self.state.sessions.insert(sha256_hex(&token), session);
        SessionGrant { token, expires_at }
    }

    /// Bearer token for scripts; skips the code step.
    pub fn create_api_token(&mut self, user: &UserId, hours: i64) -> Result<SessionGrant> {
        self.state.require_role(user, Role::ScriptUser)?;
        let ttl = Duration::hours(hours);
        if hours <= 0 {
            return Err(ApiError::Invalid("token lifetime must be positive".into()));
        }
        if ttl > self.policy.token_max {
            return Err(ApiError::DurationTooLong { max_hours: self.policy.token_max.num_hours() });
        }
        let grant = self.issue(user, CredentialKind::ApiToken, ttl);
        self.commit()?;
        Ok(grant)
    }

    /// Resolve a bearer token to its user.
    pub fn authenticate(&self, token: &str) -> Result<UserId> {
        let s = self.state.sessions.get(&sha256_hex(token)).ok_or(ApiError::Unauthenticated)?;
        if s.expires_at <= self.now() {
            return Err(ApiError::Unauthenticated);
        }
        match self.state.users.get(&s.user) {
            Some(u) if u.state == AccountState::Active => Ok(s.user.clone()),
            _ => Err(ApiError::Unauthenticated),
        }
    }

    /// Expiry of the credential behind `token`.
    pub fn token_expiry(&self, token: &str) -> Option<DateTime<Utc>> {
        self.state.sessions.get(&sha256_hex(token)).map(|s| s.expires_at)
    }

    pub fn logout(&mut self, token: &str) -> Result<()> {
        self.state.sessions.remove(&sha256_hex(token));
        self.commit()
    }

    pub fn me(&self, user: &UserId) -> Result<UserView> {
        self.state.user(user).map(UserView::from)
    }

    pub fn accept_terms(&mut self, user: &UserId, version: u32) -> Result<UserView> {
        if version != self.state.settings.terms_version {
            return Err(ApiError::Conflict(format!("current terms are version {}", self.state.settings.terms_version)));
        }
        let now = self.now();
        let u = self.state.users.get_mut(user).ok_or(ApiError::Unauthenticated)?;
        u.terms_accepted = Some((version, now));
        let view = UserView::from(&*u);
        self.commit()?;
        Ok(view)
    }

    pub(super) fn revoke_credentials(&mut self, user: &UserId) {
        self.state.sessions.retain(|_, s| &s.user != user);
        self.state.challenges.retain(|_, c| &c.user != user);
    }
}
