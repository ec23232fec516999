#include <map>

#include "tcsim/error.hpp"
#include "tcsim/scenarios.hpp"

namespace tcsim {

namespace {

// Built-in scripts. Same format as files accepted by `tcsim run`.
const std::map<std::string, const char*>& sources() {
  static const std::map<std::string, const char*> s{
      {"one-time-aik-auth", R"({
  "schema": "tcsim-script/1",
  "name": "one-time-aik-auth",
  "kind": "one-time-aik",
  "description": "A device authenticates repeatedly to services of one PCA domain using each AIK certificate once, replenishing its batch when down to the reserved credential.",
  "chains": {"phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["app", "banking-app-5"]]},
  "roster": [
    {"id": "phone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000100"},
    {"id": "mno", "role": "mno", "pca_domain": "mobile-services"},
    {"id": "shop", "role": "service"},
    {"id": "bank", "role": "service"},
    {"id": "news", "role": "service"}
  ],
  "events": [
    {"op": "enroll", "device": "phone", "pca": "mno"},
    {"op": "authenticate", "device": "phone", "pca": "mno", "services": ["shop", "bank", "news"]}
  ],
  "assertions": ["all-auth-accepted", "replenish-count", "tokens-unlinkable"]
})"},
      {"clone-attack-unbound", R"({
  "schema": "tcsim-script/1",
  "name": "clone-attack-unbound",
  "kind": "clone",
  "description": "A clone carrying a copied network credential races the genuine device for sub-domain admission; first come, first served.",
  "chains": {"phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["enforcer", "policy-enforcer-3"], ["app", "corp-app-1"]]},
  "roster": [
    {"id": "genuine", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000200"},
    {"id": "clone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000200", "clone_of": "genuine"},
    {"id": "mno", "role": "mno", "pca_domain": "restricted"}
  ],
  "config": {"registry_mode": "unbound"},
  "events": [
    {"op": "enroll", "device": "genuine", "pca": "mno"},
    {"op": "enroll", "device": "clone", "pca": "mno"},
    {"op": "network_access", "device": "genuine", "mno": "mno"},
    {"op": "authority_bind", "device": "genuine", "authority": "mno", "pca": "mno"},
    {"op": "network_access", "device": "clone", "mno": "mno"},
    {"op": "request_subdomain", "device": "clone", "mno": "mno", "pca": "mno"},
    {"op": "request_subdomain", "device": "genuine", "mno": "mno", "pca": "mno"},
    {"op": "subdomain_service", "device": "clone", "mno": "mno"},
    {"op": "subdomain_service", "device": "genuine", "mno": "mno"},
    {"op": "apply_policy", "device": "genuine", "issuer": "mno", "pca": "mno", "location": "cell-lab"},
    {"op": "apply_policy", "device": "genuine", "issuer": "mno", "pca": "mno", "location": "cell-home"}
  ],
  "assertions": ["clone-resilience", "restriction-sound", "bound-dominates", "policy-location"],
  "expect_events": [
    {"kind": "network-session", "attrs": {"granted": "true"}, "count": 2},
    {"kind": "subdomain-admission", "count": 2}
  ]
})"},
      {"clone-attack-bound", R"({
  "schema": "tcsim-script/1",
  "name": "clone-attack-bound",
  "kind": "clone",
  "description": "Same race as the unbound case, but the authority bound c_MNO to the genuine device's trust credential at joint enrollment.",
  "chains": {"phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["enforcer", "policy-enforcer-3"], ["app", "corp-app-1"]]},
  "roster": [
    {"id": "genuine", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000200"},
    {"id": "clone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000200", "clone_of": "genuine"},
    {"id": "mno", "role": "mno", "pca_domain": "restricted"}
  ],
  "config": {"registry_mode": "bound"},
  "events": [
    {"op": "enroll", "device": "genuine", "pca": "mno"},
    {"op": "enroll", "device": "clone", "pca": "mno"},
    {"op": "network_access", "device": "genuine", "mno": "mno"},
    {"op": "authority_bind", "device": "genuine", "authority": "mno", "pca": "mno"},
    {"op": "network_access", "device": "clone", "mno": "mno"},
    {"op": "request_subdomain", "device": "clone", "mno": "mno", "pca": "mno"},
    {"op": "request_subdomain", "device": "genuine", "mno": "mno", "pca": "mno"},
    {"op": "subdomain_service", "device": "clone", "mno": "mno"},
    {"op": "subdomain_service", "device": "genuine", "mno": "mno"},
    {"op": "apply_policy", "device": "genuine", "issuer": "mno", "pca": "mno", "location": "cell-lab"},
    {"op": "apply_policy", "device": "genuine", "issuer": "mno", "pca": "mno", "location": "cell-home"}
  ],
  "assertions": ["clone-resilience", "restriction-sound", "bound-dominates", "policy-location"],
  "expect_events": [
    {"kind": "network-session", "attrs": {"granted": "true"}, "count": 2},
    {"kind": "subdomain-admission", "count": 2}
  ]
})"},
      {"prepaid-happy", R"({
  "schema": "tcsim-script/1",
  "name": "prepaid-happy",
  "kind": "prepaid",
  "description": "Two anonymous prepaid phones log on with pool IMSIs, spend from their shielded balances, top up, and try to redeem a voucher twice.",
  "chains": {"prepaid-phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["vsim", "vsim-1.2"], ["ppc", "ppc-client-4"]]},
  "roster": [
    {"id": "phone-a", "role": "device", "chain": "prepaid-phone"},
    {"id": "phone-b", "role": "device", "chain": "prepaid-phone"},
    {"id": "mno", "role": "mno"},
    {"id": "pca", "role": "pca", "pca_domain": "prepaid-group"}
  ],
  "events": [
    {"op": "enroll", "device": "phone-a", "pca": "pca"},
    {"op": "enroll", "device": "phone-b", "pca": "pca"},
    {"op": "vsim_logon", "device": "phone-a", "mno": "mno"},
    {"op": "vsim_logon", "device": "phone-b", "mno": "mno"},
    {"op": "prepaid_request", "device": "phone-a", "mno": "mno", "pca": "pca", "service": "data", "units": 5},
    {"op": "prepaid_request", "device": "phone-b", "mno": "mno", "pca": "pca", "service": "voice", "units": 2},
    {"op": "prepaid_request", "device": "phone-a", "mno": "mno", "pca": "pca", "service": "voice", "units": 10},
    {"op": "top_up", "device": "phone-a", "mno": "mno", "value": 300},
    {"op": "replay_voucher", "device": "phone-a", "mno": "mno"},
    {"op": "prepaid_request", "device": "phone-a", "mno": "mno", "pca": "pca", "service": "voice", "units": 4},
    {"op": "prepaid_request", "device": "phone-b", "mno": "mno", "pca": "pca", "service": "sms", "units": 3}
  ],
  "assertions": ["anonymity", "conservation", "no-grant-without-attestation", "denial-at-zero", "distinct-imsis", "tamper-no-grant", "voucher-one-time"],
  "expect_events": [
    {"kind": "vsim-session", "count": 2},
    {"kind": "grant", "count": 4},
    {"kind": "service-denied", "attrs": {"reason": "insufficient-balance"}, "count": 1},
    {"kind": "top-up-rejected", "attrs": {"reason": "voucher-replay"}, "count": 1}
  ]
})"},
      {"prepaid-tamper", R"({
  "schema": "tcsim-script/1",
  "name": "prepaid-tamper",
  "kind": "prepaid",
  "description": "A phone runs a patched prepaid client; attestation fails, nothing is granted and the sealed balance is never decremented.",
  "chains": {"prepaid-phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["vsim", "vsim-1.2"], ["ppc", "ppc-client-4"]]},
  "roster": [
    {"id": "patched", "role": "device", "chain": "prepaid-phone", "tamper": {"component": "ppc", "payload": "ppc-client-4-unlimited"}},
    {"id": "honest", "role": "device", "chain": "prepaid-phone"},
    {"id": "mno", "role": "mno"},
    {"id": "pca", "role": "pca", "pca_domain": "prepaid-group"}
  ],
  "events": [
    {"op": "enroll", "device": "honest", "pca": "pca"},
    {"op": "enroll", "device": "patched", "pca": "pca"},
    {"op": "vsim_logon", "device": "honest", "mno": "mno"},
    {"op": "vsim_logon", "device": "patched", "mno": "mno"},
    {"op": "prepaid_request", "device": "honest", "mno": "mno", "pca": "pca", "service": "data", "units": 2},
    {"op": "prepaid_request", "device": "patched", "mno": "mno", "pca": "pca", "service": "data", "units": 2},
    {"op": "prepaid_request", "device": "patched", "mno": "mno", "pca": "pca", "service": "voice", "units": 1},
    {"op": "prepaid_request", "device": "patched", "mno": "mno", "pca": "pca", "service": "sms", "units": 10}
  ],
  "assertions": ["anonymity", "conservation", "no-grant-without-attestation", "denial-at-zero", "distinct-imsis", "tamper-no-grant"],
  "expect_events": [
    {"kind": "grant", "count": 1},
    {"kind": "service-denied", "attrs": {"reason": "attestation-rejected"}, "count": 3}
  ]
})"},
      {"prepaid-zero", R"({
  "schema": "tcsim-script/1",
  "name": "prepaid-zero",
  "kind": "prepaid",
  "description": "A phone with an empty balance is refused until it redeems a voucher.",
  "chains": {"prepaid-phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["vsim", "vsim-1.2"], ["ppc", "ppc-client-4"]]},
  "roster": [
    {"id": "phone", "role": "device", "chain": "prepaid-phone"},
    {"id": "mno", "role": "mno"},
    {"id": "pca", "role": "pca", "pca_domain": "prepaid-group"}
  ],
  "config": {"initial_balance": 0},
  "events": [
    {"op": "enroll", "device": "phone", "pca": "pca"},
    {"op": "vsim_logon", "device": "phone", "mno": "mno"},
    {"op": "prepaid_request", "device": "phone", "mno": "mno", "pca": "pca", "service": "sms", "units": 1},
    {"op": "prepaid_request", "device": "phone", "mno": "mno", "pca": "pca", "service": "data", "units": 1},
    {"op": "top_up", "device": "phone", "mno": "mno", "value": 100},
    {"op": "prepaid_request", "device": "phone", "mno": "mno", "pca": "pca", "service": "data", "units": 10},
    {"op": "prepaid_request", "device": "phone", "mno": "mno", "pca": "pca", "service": "sms", "units": 1}
  ],
  "assertions": ["anonymity", "conservation", "no-grant-without-attestation", "denial-at-zero", "distinct-imsis"],
  "expect_events": [
    {"kind": "grant", "count": 1},
    {"kind": "service-denied", "attrs": {"reason": "insufficient-balance"}, "count": 3}
  ]
})"},
      {"pos-fig4", R"({
  "schema": "tcsim-script/1",
  "name": "pos-fig4",
  "kind": "pos",
  "description": "Purchase at a vending machine: mutual attestation over the short-range link, signed order to the operator, optional vendor and payment notifications, signed acknowledgement relayed to the POS. The POS rotates its pseudonym between two purchases.",
  "chains": {
    "phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["wallet", "wallet-app-2"]],
    "pos-fw": [["boot", "pos-boot-1"], ["pos-os", "pos-os-7"], ["vending", "vending-ctl-3"]]
  },
  "roster": [
    {"id": "phone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000300"},
    {"id": "vending-1", "role": "pos", "chain": "pos-fw"},
    {"id": "mno", "role": "mno", "pca_domain": "mobile"},
    {"id": "pos-owner", "role": "pos_owner", "pca_domain": "pos-network"},
    {"id": "vendor", "role": "vendor"},
    {"id": "payment-provider", "role": "payment_provider"}
  ],
  "config": {"device_pca": "mno"},
  "attacks": ["strip-ack"],
  "events": [
    {"op": "network_access", "device": "phone", "mno": "mno"},
    {"op": "enroll", "device": "phone", "pca": "mno"},
    {"op": "enroll", "device": "vending-1", "pca": "pos-owner"},
    {"op": "pos_session", "device": "phone", "pos": "vending-1"},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "fig4", "goods": ["cola"]},
    {"op": "rotate_pseudonym", "pos": "vending-1"},
    {"op": "pos_session", "device": "phone", "pos": "vending-1"},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "fig4", "goods": ["chips", "water"]}
  ],
  "assertions": ["fig4-sequence", "delivery-after-confirmation", "mno-good-blind", "carrier-blind", "pos-pseudonyms-distinct", "pos-identity-hidden-from-mno", "strip-ack-refused"],
  "expect_events": [
    {"kind": "channel-up", "count": 2},
    {"kind": "delivery", "count": 2}
  ]
})"},
      {"pos-sep-duties", R"({
  "schema": "tcsim-script/1",
  "name": "pos-sep-duties",
  "kind": "pos",
  "description": "Purchase with separation of duties: a one-time token authenticates the customer, the POS owner sees the goods, the charging provider sees only token and grand total.",
  "chains": {
    "phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["wallet", "wallet-app-2"]],
    "pos-fw": [["boot", "pos-boot-1"], ["pos-os", "pos-os-7"], ["vending", "vending-ctl-3"]]
  },
  "roster": [
    {"id": "phone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000301"},
    {"id": "vending-1", "role": "pos", "chain": "pos-fw"},
    {"id": "mno", "role": "mno"},
    {"id": "auth-provider", "role": "auth_provider", "pca_domain": "customers"},
    {"id": "pos-owner", "role": "pos_owner", "pca_domain": "pos-network"},
    {"id": "charging-provider", "role": "charging_provider"}
  ],
  "config": {"device_pca": "auth-provider", "auth_provider": "auth-provider"},
  "attacks": ["reuse-token"],
  "events": [
    {"op": "network_access", "device": "phone", "mno": "mno"},
    {"op": "enroll", "device": "phone", "pca": "auth-provider"},
    {"op": "enroll", "device": "vending-1", "pca": "pos-owner"},
    {"op": "pos_session", "device": "phone", "pos": "vending-1"},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "sep-duties", "goods": ["cola"]},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "sep-duties", "goods": ["chips", "water"]}
  ],
  "assertions": ["charging-provider-blind", "pos-owner-customer-blind", "auth-provider-subscriber-blind", "billing-package-exact", "delivery-after-confirmation", "carrier-blind", "reuse-token-aborted"],
  "expect_events": [
    {"kind": "delivery", "count": 2},
    {"kind": "token-validated", "attrs": {"status": "ok"}, "count": 2}
  ]
})"},
      {"pos-decentralised", R"({
  "schema": "tcsim-script/1",
  "name": "pos-decentralised",
  "kind": "pos",
  "description": "Separation of duties with the billing request issued by the POS itself, holding the owner's billing key.",
  "chains": {
    "phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["wallet", "wallet-app-2"]],
    "pos-fw": [["boot", "pos-boot-1"], ["pos-os", "pos-os-7"], ["vending", "vending-ctl-3"]]
  },
  "roster": [
    {"id": "phone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000302"},
    {"id": "vending-1", "role": "pos", "chain": "pos-fw"},
    {"id": "mno", "role": "mno"},
    {"id": "auth-provider", "role": "auth_provider", "pca_domain": "customers"},
    {"id": "pos-owner", "role": "pos_owner", "pca_domain": "pos-network"},
    {"id": "charging-provider", "role": "charging_provider"}
  ],
  "config": {"device_pca": "auth-provider", "auth_provider": "auth-provider", "billing": "decentralised"},
  "attacks": ["reuse-token"],
  "events": [
    {"op": "network_access", "device": "phone", "mno": "mno"},
    {"op": "enroll", "device": "phone", "pca": "auth-provider"},
    {"op": "enroll", "device": "vending-1", "pca": "pos-owner"},
    {"op": "pos_session", "device": "phone", "pos": "vending-1"},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "sep-duties", "goods": ["water"]},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "sep-duties", "goods": ["cola", "chips"]}
  ],
  "assertions": ["charging-provider-blind", "pos-owner-customer-blind", "auth-provider-subscriber-blind", "billing-package-exact", "delivery-after-confirmation", "carrier-blind", "reuse-token-aborted"],
  "expect_events": [
    {"kind": "delivery", "count": 2},
    {"kind": "charge", "attrs": {"status": "charged"}, "count": 2}
  ]
})"},
      {"pos-mno-merged", R"({
  "schema": "tcsim-script/1",
  "name": "pos-mno-merged",
  "kind": "pos",
  "description": "Degraded privacy: the operator also acts as authentication provider, so it can link one-time tokens to the subscriber it already knows.",
  "chains": {
    "phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["wallet", "wallet-app-2"]],
    "pos-fw": [["boot", "pos-boot-1"], ["pos-os", "pos-os-7"], ["vending", "vending-ctl-3"]]
  },
  "roster": [
    {"id": "phone", "role": "device", "chain": "phone", "subscriber": "imsi-262010000000303"},
    {"id": "vending-1", "role": "pos", "chain": "pos-fw"},
    {"id": "mno", "role": "mno", "pca_domain": "customers"},
    {"id": "pos-owner", "role": "pos_owner", "pca_domain": "pos-network"},
    {"id": "charging-provider", "role": "charging_provider"}
  ],
  "config": {"device_pca": "mno", "auth_provider": "mno", "token_check": "direct"},
  "attacks": ["reuse-token"],
  "events": [
    {"op": "network_access", "device": "phone", "mno": "mno"},
    {"op": "enroll", "device": "phone", "pca": "mno"},
    {"op": "enroll", "device": "vending-1", "pca": "pos-owner"},
    {"op": "pos_session", "device": "phone", "pos": "vending-1"},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "sep-duties", "goods": ["cola"]},
    {"op": "purchase", "device": "phone", "pos": "vending-1", "flow": "sep-duties", "goods": ["water"]}
  ],
  "assertions": ["charging-provider-blind", "pos-owner-customer-blind", "auth-provider-subscriber-blind", "billing-package-exact", "delivery-after-confirmation", "reuse-token-aborted"],
  "expect_events": [
    {"kind": "delivery", "count": 2}
  ]
})"},
      {"facility-entry", R"({
  "schema": "tcsim-script/1",
  "name": "facility-entry",
  "kind": "facility",
  "description": "Employees attest at the gate; inside the zone camera and MMS are disabled, room terminals are served through the phone, and leaving restores the base policy. A visitor and a phone with a patched enforcer are turned away.",
  "chains": {"company-phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["enforcer", "policy-enforcer-3"], ["app", "corp-app-1"]]},
  "roster": [
    {"id": "employee", "role": "device", "chain": "company-phone", "subscriber": "imsi-262010000000400"},
    {"id": "visitor", "role": "device", "chain": "company-phone", "subscriber": "imsi-262010000000401"},
    {"id": "patched", "role": "device", "chain": "company-phone", "subscriber": "imsi-262010000000402", "tamper": {"component": "enforcer", "payload": "policy-enforcer-3-noop"}},
    {"id": "gate-1", "role": "gate"},
    {"id": "company", "role": "company_server", "pca_domain": "company"},
    {"id": "mno", "role": "mno", "pca_domain": "mobile"},
    {"id": "room-panel", "role": "terminal"},
    {"id": "facility-provider", "role": "external_provider"}
  ],
  "events": [
    {"op": "network_access", "device": "employee", "mno": "mno"},
    {"op": "enroll", "device": "employee", "pca": "company"},
    {"op": "enroll", "device": "patched", "pca": "company"},
    {"op": "enroll", "device": "visitor", "pca": "mno"},
    {"op": "enter", "device": "employee", "gate": "gate-1", "zone": "zone-a", "pca": "company"},
    {"op": "terminal", "device": "employee", "terminal": "room-panel", "server": "company", "request": "lights-on"},
    {"op": "exit", "device": "employee", "gate": "gate-1"},
    {"op": "enter", "device": "visitor", "gate": "gate-1", "zone": "zone-a", "pca": "mno"},
    {"op": "enter", "device": "patched", "gate": "gate-1", "zone": "zone-a", "pca": "company"}
  ],
  "assertions": ["enforcer-sound", "gate-logging", "zone-policy", "policy-restored"],
  "expect_events": [
    {"kind": "entry", "attrs": {"granted": "true"}, "count": 1},
    {"kind": "entry", "attrs": {"granted": "false"}, "count": 2},
    {"kind": "terminal-served", "count": 1}
  ]
})"},
      {"facility-midnight", R"({
  "schema": "tcsim-script/1",
  "name": "facility-midnight",
  "kind": "facility",
  "description": "A late meeting needs room power from the external facility provider; the company's policy enforcer strips attendee identities from the request.",
  "chains": {"company-phone": [["crtm", "crtm-1.0"], ["bios", "bios-2.3"], ["os", "os-11.4"], ["enforcer", "policy-enforcer-3"], ["app", "corp-app-1"]]},
  "roster": [
    {"id": "employee", "role": "device", "chain": "company-phone", "subscriber": "imsi-262010000000410"},
    {"id": "gate-1", "role": "gate"},
    {"id": "company", "role": "company_server", "pca_domain": "company"},
    {"id": "mno", "role": "mno"},
    {"id": "room-panel", "role": "terminal"},
    {"id": "facility-provider", "role": "external_provider"}
  ],
  "config": {"access_check": "cache"},
  "events": [
    {"op": "enroll", "device": "employee", "pca": "company"},
    {"op": "enter", "device": "employee", "gate": "gate-1", "zone": "zone-a", "pca": "company"},
    {"op": "meeting", "server": "company", "external": "facility-provider", "room": "room-12", "attendees": ["alice@corp.example", "bob@corp.example", "carol@partner.example"]},
    {"op": "terminal", "device": "employee", "terminal": "room-panel", "server": "company", "request": "projector-on"},
    {"op": "exit", "device": "employee", "gate": "gate-1"}
  ],
  "assertions": ["enforcer-sound", "gate-logging", "zone-policy", "policy-restored"],
  "expect_events": [
    {"kind": "entry", "attrs": {"granted": "true"}, "count": 1},
    {"kind": "enforcer-filtered", "count": 1}
  ]
})"},
  };
  return s;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{
      "one-time-aik-auth", "clone-attack-bound", "clone-attack-unbound", "prepaid-happy",
      "prepaid-tamper",    "prepaid-zero",       "pos-fig4",             "pos-sep-duties",
      "pos-decentralised", "pos-mno-merged",     "facility-entry",       "facility-midnight"};
  return names;
}

bool in_catalog(const std::string& name) { return sources().count(name) != 0; }

ScenarioScript catalog_script(const std::string& name) {
  auto it = sources().find(name);
  if (it == sources().end()) throw Error(Errc::config_error, "no scenario named " + name);
  return parse_script(nlohmann::json::parse(it->second));
}

}  // namespace tcsim
