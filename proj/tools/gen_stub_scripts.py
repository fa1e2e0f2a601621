#!/usr/bin/env python3
"""Generate the scripted stub-model outputs under data/stub/.

Two labels are produced:
  specific  organization-grounded outputs (multi-agent case study content for
            health_15, seed-varying single-agent pools)
  generic   sector-agnostic outputs identical across runs

Usage: gen_stub_scripts.py [data_dir]
"""
import json
import os
import sys

DATA = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data")
FUNCTIONS = ["Identify", "Protect", "Detect", "Respond", "Recover"]


def load_profiles():
    out = {}
    pdir = os.path.join(DATA, "profiles")
    for name in sorted(os.listdir(pdir)):
        if name.endswith(".json"):
            with open(os.path.join(pdir, name)) as f:
                p = json.load(f)
            out[p["profile_id"]] = p
    return out


# Token unique to each profile that appears in every stage's context, so
# variants can be selected even when org_profile is not among a role's reads.
MARK = {
    "health_15": "FHIR",
    "fintech_30": "Stripe",
    "mfg_40": "CNC",
    "retail_20": "Shopify",
    "saas_25": "Kubernetes",
}

AMBIGUITIES = {
    "health_15": [
        "HIPAA applicability: unconfirmed (patient records are processed for a hospital network, but HIPAA is never named)",
        "Business associate agreement with the hospital network: not stated",
        "Backup coverage: unclear which systems beyond AWS are backed up",
    ],
    "fintech_30": ["Contractor access scope in Azure: not stated"],
    "mfg_40": ["CUI handling locations for the DoD contract: not stated"],
    "retail_20": ["Whether custom Shopify apps touch cardholder data: unconfirmed"],
    "saas_25": ["Data processing agreements with EU customers: status not stated"],
}


def org_profile(p):
    return {
        "profile_id": p["profile_id"],
        "industry": p["industry"],
        "employee_count": p["employee_count"],
        "regulatory_scope": p.get("regulatory_scope", []),
        "systems": p["systems"],
        "data_locations": p["data_locations"],
        "self_rated_maturity": p.get("self_rated_maturity", 1),
        "ambiguities": AMBIGUITIES[p["profile_id"]],
    }


def threat(title, actor, vectors, weaknesses, rationale):
    return {"title": title, "actor": actor, "vectors": vectors, "weaknesses": weaknesses, "rationale": rationale}


def item(control, finding, status):
    return {"control": control, "finding": finding, "status": status}


def risk(title, likelihood, impact, reasoning, threats, gaps):
    return {
        "title": title,
        "likelihood": likelihood,
        "impact": impact,
        "reasoning": reasoning,
        "linked_threat_titles": threats,
        "linked_control_gaps": gaps,
    }


def rec(action, phase, cost, risks, rationale):
    return {"action": action, "phase_days": phase, "cost_range": cost, "linked_risk_titles": risks, "rationale": rationale}


# ---------------------------------------------------------------------------
# specific, multi-agent

SPECIFIC = {}

SPECIFIC["health_15"] = {
    "threats": [
        threat("Unsecured PHI",
               "Financially motivated data thieves and ransomware affiliates who sell or extort health records",
               ["publicly readable S3 bucket or snapshot", "Google Drive links shared with 'anyone with the link'",
                "lost or stolen unencrypted laptop holding exported patient extracts"],
               ["AWS S3 and RDS PostgreSQL without reviewed access policies", "Google Drive used for analyst exports",
                "staff laptops (macOS) with local copies of patient data"],
               "Patient records from the hospital network sit in three places with no inventory and no encryption "
               "review; health records resell well and a single exposed bucket would trigger breach notification "
               "to the hospital and its patients (see PR.DS-1 and ID.AM-3)."),
        threat("Unpatched FHIR Integrations",
               "Opportunistic attackers scanning for known flaws in internet-facing healthcare APIs",
               ["exploitation of a known vulnerability in the FHIR integration service",
                "abuse of long-lived API credentials shared with the hospital network"],
               ["FHIR integration service patched ad hoc", "no vulnerability scanning of internet-facing endpoints",
                "static API keys exchanged with the hospital"],
               "The FHIR service is the one component directly reachable from the hospital network and the internet; "
               "with no patch schedule and no scans, a published flaw would stay open for months (ID.RA-1, DE.CM-8)."),
        threat("Insufficient Authentication",
               "Credential phishing crews targeting small businesses that use Google Workspace and AWS",
               ["phishing for Google Workspace passwords", "password reuse against the AWS console",
                "session theft from an unmanaged laptop"],
               ["password-only login on all systems", "no MFA even on AWS root or Workspace admin accounts",
                "shared administrator credentials"],
               "Every system accepts a password alone, so one successful phishing email yields console access to the "
               "AWS account that stores patient data; this is the cheapest path in for any attacker (PR.AC-7)."),
        threat("Ransomware via Compromised Laptop",
               "Ransomware affiliates who buy initial access from phishing or malware brokers",
               ["malicious attachment or download on a staff laptop", "lateral movement to Google Drive sync folders",
                "destruction of AWS backups with stolen credentials"],
               ["no endpoint detection on laptops", "backups never test-restored", "no incident response plan"],
               "With no endpoint tooling, no tested backups and nobody designated to respond, an encryption event "
               "would halt analytics work for the hospital contract and could destroy the only copies of derived "
               "datasets (PR.IP-4, RS.CO-1)."),
    ],
    "controls": {
        "Identify": [
            item("Asset inventory", "No inventory of laptops, AWS resources or SaaS accounts exists; staff could not list "
                 "where patient data is stored.", "gap"),
            item("Risk assessment process", "No documented risk process and no prior assessment; regulatory obligations "
                 "tied to the hospital contract have not been analysed.", "gap"),
            item("Supplier inventory", "Vendors and the hospital integration are not tracked, and no contact or "
                 "security requirement is recorded for any of them.", "gap"),
        ],
        "Protect": [
            item("Access control", "Role-based access in AWS gives analysts separate accounts, which is a sound start, "
                 "but permissions have never been reviewed.", "partial"),
            item("Multi-factor authentication", "No MFA anywhere, including AWS root and Google Workspace admin "
                 "accounts.", "gap"),
            item("Firewall configuration", "The office firewall runs its default ruleset and has never been tuned; it "
                 "exists on paper but blocks nothing the business cares about.", "gap"),
            item("Data encryption", "RDS encryption is enabled by the provider default; laptops and Drive exports are "
                 "unencrypted and unmanaged.", "partial"),
        ],
        "Detect": [
            item("Log aggregation", "No log aggregation of any kind; CloudTrail is off and Workspace audit logs are "
                 "never reviewed.", "gap"),
            item("Malware detection", "Laptops rely on built-in OS protection only, with no endpoint detection or "
                 "alerting.", "gap"),
        ],
        "Respond": [
            item("Incident response plan", "No plan exists and no one is designated to call if something goes wrong.",
                 "gap"),
            item("Breach notification", "No procedure for notifying the hospital network of a suspected "
                 "breach.", "gap"),
        ],
        "Recover": [
            item("Backup testing", "AWS backups exist but have never been test-restored, so recovery time is "
                 "unknown.", "gap"),
            item("Recovery planning", "No recovery plan or priority list for restoring the analytics "
                 "platform.", "gap"),
        ],
    },
    "risks": [
        risk("Lack of Security Policies", "High", "High",
             "No written policy governs how patient data is handled, shared or deleted, so every other control depends "
             "on individual habits; this amplifies both the PHI exposure and authentication threats (ID.GV-1).",
             ["Unsecured PHI", "Insufficient Authentication"], ["Risk assessment process", "Asset inventory"]),
        risk("Insufficient Authentication Controls", "High", "Medium",
             "Password-only access to AWS and Workspace makes credential phishing likely; impact is bounded by the "
             "role separation already in AWS (PR.AC-7).",
             ["Insufficient Authentication"], ["Multi-factor authentication"]),
        risk("Inadequate Incident Response Plan", "High", "High",
             "With no plan and no named responder, any ransomware or exposure event becomes a prolonged outage and a "
             "late notification to the hospital (RS.CO-1).",
             ["Ransomware via Compromised Laptop"], ["Incident response plan", "Breach notification"]),
        risk("Data Security & Privacy", "High", "High",
             "Patient data spread across S3, Drive and laptops without inventory or encryption review makes exposure "
             "likely and the consequences contractual and regulatory (PR.DS-1).",
             ["Unsecured PHI"], ["Data encryption", "Asset inventory"]),
        risk("Unsecured Firewall Configuration", "Medium", "High",
             "The default office firewall leaves the FHIR service's management paths reachable; exploitation needs a "
             "known flaw, but success would expose the hospital integration (PR.AC-5).",
             ["Unpatched FHIR Integrations"], ["Firewall configuration"]),
        risk("Insufficient Cloud Security Controls", "Medium", "Medium",
             "AWS lacks logging and configuration review; provider defaults limit the worst cases, so both ratings "
             "stay medium (DE.AE-3).",
             ["Unsecured PHI", "Unpatched FHIR Integrations"], ["Log aggregation"]),
        risk("Third-Party & Supply Chain Security", "High", "Medium",
             "Static API keys shared with the hospital and untracked SaaS vendors make a partner-side compromise "
             "likely to reach this company (ID.SC-2).",
             ["Unpatched FHIR Integrations"], ["Supplier inventory"]),
    ],
    "recs": [
        rec("Adopt a written security policy with an external consultant", 30, "$3K–$6K",
            ["Lack of Security Policies", "Data Security & Privacy"],
            "A short policy set (acceptable use, data handling, access) gives a 15-person team rules to follow without "
            "hiring security staff."),
        rec("Turn on MFA for every account, starting with AWS root and Workspace admins", 60, "$0–$500/year",
            ["Insufficient Authentication Controls"],
            "Built-in MFA in AWS and Workspace costs little and closes the cheapest attack path."),
        rec("Replace the default firewall rules with a reviewed deny-by-default set", 60, "$500–$1.5K",
            ["Unsecured Firewall Configuration"],
            "A one-time review by the firewall vendor or an MSP removes exposure of the FHIR management paths."),
        rec("Write an incident response plan with named roles and a call list", 90, "$1K–$3K",
            ["Inadequate Incident Response Plan"],
            "Assign an owner, a backup, the hospital contact and an outside responder before an incident forces it."),
        rec("Rotate hospital API keys and record security terms for each vendor", 90, "$0–$1K",
            ["Third-Party & Supply Chain Security"],
            "A vendor list with contacts and key rotation limits partner-side compromise."),
        rec("Deploy endpoint detection and response on all laptops", "beyond", "$10K–$20K",
            ["Data Security & Privacy"],
            "Important once policy and MFA are in place; budget it for the next fiscal year."),
        rec("Commission a cloud security audit of the AWS account", "beyond", "$5K–$10K",
            ["Insufficient Cloud Security Controls"],
            "An outside review of S3, RDS and logging settings after the first 90 days."),
    ],
    "summary": "This 15-person health data analytics company processes patient records for a regional hospital "
               "network with no security staff and a self-rated maturity of 2 out of 10. The highest risks are the "
               "lack of written security policies, weak incident readiness and unprotected patient data spread across "
               "AWS, Google Drive and laptops. It is not compliant with the Identify, Detect, Respond and Recover "
               "functions and only partially compliant with Protect. The first 90 days focus on a written policy, MFA "
               "everywhere, a tuned firewall and an incident response plan. Whether HIPAA applies has not been "
               "confirmed and needs a human decision.",
    "messages": ["Confirm HIPAA applicability with the hospital network.",
                 "MFA on AWS and Google Workspace is the cheapest high-value fix.",
                 "Backups have never been restored; test one this quarter."],
}


def short_profile_content(pid, threats, controls, risks, recs, summary, messages):
    SPECIFIC[pid] = {"threats": threats, "controls": controls, "risks": risks, "recs": recs,
                     "summary": summary, "messages": messages}


short_profile_content(
    "fintech_30",
    [
        threat("Unauthorized Access to PII", "Account-takeover groups targeting lending portals",
               ["credential stuffing against the applicant portal", "phishing the Azure contractor"],
               ["Azure App Service portal", "contractor-held Azure owner rights"],
               "Applicant income documents and bank details are high-value; the outside contractor holds owner "
               "rights with no review (PR.AC-4)."),
        threat("Data Breach (Insufficient Controls)", "Criminal groups harvesting financial identity data",
               ["SQL injection in the portal", "over-broad Salesforce report exports"],
               ["Azure SQL with shared service login", "Salesforce profiles with export rights"],
               "Customer financial records exist in Azure SQL and Salesforce with broad export rights and no data "
               "flow map (ID.AM-3)."),
        threat("Denial of Service", "Extortion crews targeting lenders during application peaks",
               ["volumetric attack on the portal", "API abuse of the Stripe webhook endpoint"],
               ["single-region App Service", "no rate limits on webhooks"],
               "A lending portal offline at month end loses applications; the WAF covers only the main site."),
    ],
    {
        "Identify": [item("Data flow mapping", "No map of how applicant data moves between Azure, Stripe and "
                          "Salesforce.", "gap"),
                     item("Regulatory mapping", "GLBA and PCI DSS are named but controls are not mapped to them.",
                          "partial")],
        "Protect": [item("Single sign-on", "Okta SSO covers staff apps with MFA.", "in_place"),
                    item("Privileged access", "The Azure contractor holds standing owner rights with no review.",
                         "gap"),
                    item("Database credentials", "The portal uses one shared SQL login with full rights.", "gap")],
        "Detect": [item("Log monitoring", "Azure Monitor collects logs but nobody reviews alerts.", "partial"),
                   item("Vulnerability scanning", "No scans of the applicant portal.", "gap")],
        "Respond": [item("Incident response plan", "A template plan exists but has never been exercised.",
                         "partial")],
        "Recover": [item("Database recovery", "Point-in-time restore is enabled but untested.", "partial")],
    },
    [
        risk("Account Takeover of Applicant Portal", "High", "High",
             "Credential stuffing against the portal is common and exposes bank details (PR.AC-7).",
             ["Unauthorized Access to PII"], ["Privileged access"]),
        risk("Financial Data Exposure", "Medium", "High",
             "Shared SQL credentials and broad exports make a breach plausible (PR.DS-1).",
             ["Data Breach (Insufficient Controls)"], ["Database credentials", "Data flow mapping"]),
        risk("Portal Availability", "Medium", "Medium",
             "Single-region hosting without rate limits risks outages at peak.",
             ["Denial of Service"], ["Log monitoring"]),
    ],
    [
        rec("Remove standing contractor owner rights and use time-bound elevation", 30, "$0–$1K",
            ["Account Takeover of Applicant Portal"], "Okta and Azure PIM features are already licensed."),
        rec("Replace the shared SQL login with per-service identities", 60, "$2K–$5K",
            ["Financial Data Exposure"], "Limits the blast radius of an injection flaw."),
        rec("Add rate limiting and a second region for the portal", "beyond", "$8K–$15K",
            ["Portal Availability"], "Worth doing once access issues are closed."),
    ],
    "This 30-person lending platform protects staff apps well with Okta but leaves applicant data exposed through "
    "contractor rights and shared database credentials. The first 90 days remove standing privileges and split "
    "database identities.",
    ["Contractor privileges are the largest single exposure."],
)

short_profile_content(
    "mfg_40",
    [
        threat("Unpatched Windows AD", "Ransomware affiliates who target manufacturers",
               ["exploitation of end-of-life Windows Server 2012", "pass-the-hash from an office PC"],
               ["Windows Active Directory on Server 2012", "flat office/plant network"],
               "End-of-life domain controllers receive no fixes, and ransomware crews favour manufacturers that "
               "cannot tolerate downtime (ID.RA-1)."),
        threat("OT/IIoT Sensor Vulnerabilities", "Opportunistic attackers pivoting from the office network",
               ["default credentials on IIoT vibration sensors", "unauthenticated CNC controller protocols"],
               ["IIoT vibration sensors", "CNC controllers on the office network"],
               "Sensors and CNC controllers share the office network, so any compromised PC can reach them "
               "(PR.AC-5)."),
        threat("Insufficient Segmentation", "Insiders and malware spreading laterally",
               ["worm propagation across the flat network", "misuse of shared plant PCs"],
               ["flat office/plant network", "shared plant floor accounts"],
               "One broadcast domain means a single infection reaches ERP, file server and machines alike "
               "(CIS Control 4.2)."),
    ],
    {
        "Identify": [item("Asset inventory", "Plant devices and sensors are not inventoried.", "gap"),
                     item("CUI identification", "Controlled information for the DoD contract is not located.",
                          "gap")],
        "Protect": [item("Network segmentation", "Office and plant share one flat network.", "gap"),
                    item("Patch management", "Domain controllers run an end-of-life Windows version.", "gap"),
                    item("Antivirus", "Office PCs run signature antivirus.", "partial")],
        "Detect": [item("Log collection", "Domain controller logs are overwritten weekly and never read.", "gap")],
        "Respond": [item("Incident response plan", "No plan for a production-stopping incident.", "gap")],
        "Recover": [item("Backups", "Nightly tape backups run, but restores have not been tried in a year.",
                         "partial")],
    },
    [
        risk("Ransomware Through Legacy Domain Controllers", "High", "High",
             "End-of-life Server 2012 plus a flat network makes domain-wide encryption likely (PR.IP-12).",
             ["Unpatched Windows AD", "Insufficient Segmentation"], ["Patch management", "Network segmentation"]),
        risk("Production Disruption via Plant Devices", "Medium", "High",
             "Reachable CNC controllers and sensors could halt production (PR.AC-5).",
             ["OT/IIoT Sensor Vulnerabilities"], ["Network segmentation", "Asset inventory"]),
        risk("DoD Contract Non-Compliance", "Medium", "Medium",
             "Unlocated controlled information puts the supplier status at risk.",
             ["Insufficient Segmentation"], ["CUI identification"]),
    ],
    [
        rec("Separate plant devices onto their own VLAN with a firewall between office and plant", 30, "$2K–$6K",
            ["Production Disruption via Plant Devices", "Ransomware Through Legacy Domain Controllers"],
            "The existing switches support VLANs; an MSP can do this in a weekend."),
        rec("Migrate domain controllers to a supported Windows Server release", 60, "$4K–$9K",
            ["Ransomware Through Legacy Domain Controllers"], "Removes the unpatchable core of the network."),
        rec("Locate controlled information and document its handling", 90, "$3K–$8K",
            ["DoD Contract Non-Compliance"], "Needed before any NIST SP 800-171 self-assessment."),
    ],
    "This 40-person manufacturer runs its plant and office on one flat network anchored by end-of-life domain "
    "controllers. Segmentation and a domain controller upgrade come first.",
    ["Segment plant devices before anything else."],
)

short_profile_content(
    "retail_20",
    [
        threat("Unpatched Vulns in Shopify Apps", "Card-skimming groups targeting small storefronts",
               ["exploitation of stale custom app dependencies", "injected skimming script"],
               ["custom Shopify apps not updated in two years"],
               "Stale custom apps with checkout access are the classic skimming entry point (ID.RA-1)."),
        threat("Insufficient Controls for AWS", "Opportunistic attackers scanning for leaked keys",
               ["leaked Lambda access keys", "over-permissive IAM role"],
               ["AWS Lambda order sync with broad IAM rights"],
               "The order-sync Lambda holds broad rights and long-lived keys (PR.AC-4)."),
        threat("Phishing Attacks", "Fraudsters impersonating suppliers and Shopify support",
               ["credential phishing of the shared admin login", "invoice fraud emails"],
               ["shared store admin login", "seasonal staff with admin rights"],
               "A shared admin login given to seasonal staff means one phished password controls the store "
               "(PR.AT-1)."),
    ],
    {
        "Identify": [item("App inventory", "Custom apps and their permissions are not tracked.", "gap")],
        "Protect": [item("Admin accounts", "One shared store admin login is used by all staff.", "gap"),
                    item("Checkout", "Shopify-managed checkout keeps card data off company systems.", "in_place")],
        "Detect": [item("Store audit log", "Shopify activity logs are never reviewed.", "gap")],
        "Respond": [item("Incident response plan", "No plan for a skimming or takeover incident.", "gap")],
        "Recover": [item("Store backups", "Product and order data are not exported or backed up.", "gap")],
    },
    [
        risk("Checkout Skimming via Custom Apps", "Medium", "High",
             "Unmaintained apps with storefront access could inject skimmers (PR.IP-12).",
             ["Unpatched Vulns in Shopify Apps"], ["App inventory"]),
        risk("Store Takeover Through Shared Admin", "High", "High",
             "A phished shared admin credential gives full store control (PR.AC-1).",
             ["Phishing Attacks"], ["Admin accounts"]),
        risk("Cloud Key Misuse", "Medium", "Medium",
             "Leaked Lambda keys could expose order data.", ["Insufficient Controls for AWS"], ["App inventory"]),
    ],
    [
        rec("Give every staff member their own Shopify account with MFA", 30, "$0",
            ["Store Takeover Through Shared Admin"], "Shopify staff accounts are included in the plan."),
        rec("Update or remove custom Shopify apps", 60, "$2K–$5K",
            ["Checkout Skimming via Custom Apps"], "A contractor review of the two custom apps."),
        rec("Scope the Lambda IAM role and rotate its keys", 90, "$0–$1K", ["Cloud Key Misuse"],
            "Least privilege for the only cloud workload."),
    ],
    "This 20-person online retailer keeps card data off its systems but shares one admin login and runs stale "
    "custom apps. Individual accounts with MFA come first.",
    ["Stop sharing the store admin login."],
)

short_profile_content(
    "saas_25",
    [
        threat("Unauthorized Access to PII", "Attackers targeting SaaS customer data for resale",
               ["stolen engineer credentials", "abuse of broad production access"],
               ["GCP Kubernetes with broad engineer access", "Cloud SQL"],
               "Engineers hold standing production access, so one stolen laptop session reaches customer data "
               "(PR.AC-4)."),
        threat("Data Breach (Insufficient Measures)", "Criminal groups harvesting B2B contact data",
               ["secrets committed to GitHub", "misconfigured Cloud SQL exports"],
               ["GitHub repositories", "Cloud SQL backups"],
               "Secrets in repositories and unreviewed exports are common breach paths for small SaaS teams "
               "(PR.DS-1)."),
        threat("DoS Attack", "Competitor-funded or extortion attackers",
               ["application-layer flood on the API", "tenant resource exhaustion"],
               ["single GKE cluster", "no per-tenant rate limits"],
               "A single cluster with no per-tenant limits lets one flood take every customer offline."),
    ],
    {
        "Identify": [item("Data inventory", "Customer data stores are known but not classified.", "partial")],
        "Protect": [item("Production access", "Engineers hold standing production access for on-call.", "gap"),
                    item("Customer MFA", "Auth0 enforces MFA for customer logins.", "in_place")],
        "Detect": [item("Secret scanning", "GitHub secret scanning is not enabled.", "gap")],
        "Respond": [item("Incident response plan", "An on-call runbook exists without security scenarios.",
                         "partial")],
        "Recover": [item("Database backups", "Cloud SQL backups run daily and were restored last quarter.",
                         "in_place")],
    },
    [
        risk("Customer Data Exposure Through Engineer Access", "High", "High",
             "Standing production access turns any engineer compromise into a customer breach (PR.AC-4).",
             ["Unauthorized Access to PII"], ["Production access"]),
        risk("Secrets Leakage from Repositories", "Medium", "High",
             "Unscanned repositories make credential leaks likely to go unnoticed.",
             ["Data Breach (Insufficient Measures)"], ["Secret scanning"]),
        risk("Service Outage for All Tenants", "Medium", "Medium",
             "A flood on the shared cluster affects every customer.", ["DoS Attack"], ["Production access"]),
    ],
    [
        rec("Replace standing production access with just-in-time elevation", 30, "$0–$2K",
            ["Customer Data Exposure Through Engineer Access"], "GCP IAM conditions support this today."),
        rec("Enable GitHub secret scanning and push protection", 30, "$0",
            ["Secrets Leakage from Repositories"], "Free for the current plan."),
        rec("Add per-tenant rate limits at the API gateway", 90, "$3K–$6K",
            ["Service Outage for All Tenants"], "Protects every tenant from one noisy neighbour."),
    ],
    "This 25-person SaaS company has strong customer authentication and tested backups but gives engineers "
    "standing production access. Just-in-time access and secret scanning come first.",
    ["Standing engineer access is the main exposure."],
)


# ---------------------------------------------------------------------------
# generic, multi-agent: the same sector-agnostic content for everyone

def generic_content(p):
    sys0 = p["systems"][0]
    mark = MARK[p["profile_id"]]
    threats = [
        threat("Unauthorized Access", "External attackers",
               ["stolen passwords", "brute-force login attempts"], [sys0],
               "Attackers may gain unauthorized access to systems and data if access controls are weak."),
        threat("Data Breach", "Cybercriminals", ["exfiltration of sensitive records"], [sys0],
               "Sensitive data could be stolen, causing financial and reputational damage."),
        threat("Malware Infection", "Malware authors", ["malicious email attachments", "drive-by downloads"],
               ["employee workstations"], "Malware can disrupt operations and lead to data loss."),
    ]
    controls = {
        "Identify": [item("Asset management", "Asset management practices should be reviewed and documented.",
                          "partial")],
        "Protect": [item("Access control", f"Access control for {mark}-related systems should follow best "
                         "practices.", "partial"),
                    item("Security awareness", "Staff security training should be conducted regularly.", "gap")],
        "Detect": [item("Monitoring", "Security monitoring should be improved.", "gap")],
        "Respond": [item("Incident response", "Incident response procedures should be documented.", "gap")],
        "Recover": [item("Backups", "Backups should be performed and tested regularly.", "partial")],
    }
    risks = [
        risk("Unauthorized Access Risk", "Medium", "High", "Weak access controls could allow unauthorized access.",
             ["Unauthorized Access"], ["Access control"]),
        risk("Data Breach Risk", "Medium", "High", "Sensitive data could be exposed.", ["Data Breach"],
             ["Monitoring"]),
        risk("Malware Risk", "Medium", "Medium", "Malware could disrupt operations.", ["Malware Infection"],
             ["Security awareness"]),
    ]
    recs = [
        rec("Implement strong access controls", 30, "$1K–$5K", ["Unauthorized Access Risk"],
            "Access controls reduce unauthorized access."),
        rec("Deploy data loss prevention", 60, "$5K–$10K", ["Data Breach Risk"], "Protects sensitive data."),
        rec("Provide security awareness training", 90, "$1K–$3K", ["Malware Risk"], "Trained staff reduce malware."),
    ]
    return {"threats": threats, "controls": controls, "risks": risks, "recs": recs,
            "summary": "The organization faces common cybersecurity risks including unauthorized access, data breaches "
                       "and malware. Implementing standard security controls is recommended.",
            "messages": ["Follow security best practices."]}


# Verbose models attach an attack narrative to every threat and observed
# evidence to every finding; the stub outputs do the same so stage outputs
# have realistic size.
EVIDENCE = {
    "Identify": "Interviews with the owner and two staff members, plus a walk-through of the admin consoles, "
                "found no record of who owns {sys}, when it was last reviewed, or which business process "
                "depends on it. Nobody could produce a diagram or a spreadsheet listing systems and data stores.",
    "Protect": "Evidence came from console screenshots supplied with the questionnaire and a review of account "
               "settings for {sys}; the team could not show a written standard describing how accounts are "
               "created, reviewed or removed when people leave, and former staff accounts were still active.",
    "Detect": "Nobody receives alerts for {sys} today, so an intrusion would be noticed only when a customer, "
              "partner or service provider reports unusual activity, which typically happens weeks after the "
              "initial access. Retention settings were left at vendor defaults.",
    "Respond": "Asked who would be called first during a suspected breach involving {sys}, staff gave different "
               "answers, and no contact details for outside help, insurers or regulators are written down. No "
               "tabletop exercise has ever been run.",
    "Recover": "No recovery time objective has been set, and the team could not estimate how long {sys} would be "
               "unavailable if its primary data store were encrypted or deleted. Restore steps exist only in one "
               "person's memory.",
}

FILL = {
    "Identify": [("Risk register", "No risk register or periodic review of security risks is kept.", "gap"),
                 ("Third-party inventory", "Service providers and their access are not tracked.", "gap"),
                 ("Asset ownership", "Systems have no named owner responsible for their security.", "gap")],
    "Protect": [("Security awareness training", "Staff have received no phishing or data-handling training.",
                 "gap"),
                ("Configuration baseline", "Systems run vendor defaults with no documented baseline.", "gap"),
                ("Vulnerability patching", "Patching happens ad hoc with no schedule or tracking.", "partial")],
    "Detect": [("Vulnerability scanning", "No scans of internet-facing systems are performed.", "gap"),
               ("Log retention", "Logs are kept for vendor-default periods and never reviewed.", "gap"),
               ("Endpoint detection", "Workstations have no endpoint detection or central alerting.", "gap")],
    "Respond": [("Response roles", "No one is designated to coordinate an incident.", "gap"),
                ("Communications", "No template or procedure exists for notifying customers or partners.", "gap"),
                ("Forensic readiness", "No arrangement with an outside responder exists.", "gap")],
    "Recover": [("Recovery priorities", "No list of systems in restore order exists.", "gap"),
                ("Restore testing", "Restores are not rehearsed on a schedule.", "gap"),
                ("Lessons learned", "No process feeds incidents back into improvements.", "gap")],
}


def scenario(p, t):
    return (f"Step 1: {t['actor']} identify {p['industry'].lower()} organizations of about "
            f"{p['employee_count']} staff as soft targets and begin reconnaissance. "
            f"Step 2: initial access is gained through {t['vectors'][0]}. "
            f"Step 3: the attacker exploits {t['weaknesses'][0]} to widen access, which the current controls "
            f"would neither prevent nor detect. "
            f"Step 4: data is taken or systems are disrupted, and the organization learns of it from a customer "
            f"or partner rather than from its own monitoring. Likely entry points were chosen from the systems "
            f"named in the questionnaire rather than from a generic catalog, and each vector was checked against "
            f"the controls the organization says it already has.")


def elaborate(p, content):
    c = json.loads(json.dumps(content))
    systems = p["systems"]
    for t in c["threats"]:
        t["scenario"] = scenario(p, t)
    for fn in FUNCTIONS:
        items = c["controls"][fn]
        for control, finding, status in FILL[fn]:
            if len(items) >= 4:
                break
            if all(i["control"] != control for i in items):
                items.append(item(control, finding, status))
        for n, it in enumerate(items):
            it["evidence"] = EVIDENCE[fn].format(sys=systems[n % len(systems)])
    return c


def multi_outputs(p, content):
    content = elaborate(p, content)
    return {
        "risk_intake": org_profile(p),
        "threat_modeling": {"threats": content["threats"]},
        "control_assessment": {"functions": content["controls"]},
        "risk_scoring": {"risks": content["risks"]},
        "mitigation": {"recommendations": content["recs"]},
        "report_synthesis": {"exec_summary": content["summary"], "key_messages": content["messages"],
                             "contradictions": []},
    }


# ---------------------------------------------------------------------------
# single-agent (cross-sector: exactly three threats, risks, recommendations)

# Three pools per profile. Each run shares one threat title and adds two of
# its own, so three seeds yield seven distinct titles.
SPECIFIC_POOLS = {
    "health_15": ("Unsecured PHI", [["Unpatched FHIR Integrations", "Insufficient Authentication"],
                                    ["Hospital VPN Credential Abuse", "Ransomware on Analyst Laptops"],
                                    ["Misconfigured S3 Patient Exports", "Google Drive Oversharing"]]),
    "fintech_30": ("Unauthorized Access to PII", [["Data Breach (Insufficient Controls)", "Denial of Service"],
                                                 ["Loan Document Fraud", "Contractor Azure Privilege Abuse"],
                                                 ["Stripe Webhook Spoofing", "Salesforce Export Leakage"]]),
    "mfg_40": ("Unpatched Windows AD", [["OT/IIoT Sensor Vulnerabilities", "Insufficient Segmentation"],
                                        ["CNC Controller Tampering", "ERP Ransomware"],
                                        ["CUI Exfiltration", "Legacy Server 2012 Exploits"]]),
    "retail_20": ("Phishing Attacks", [["Unpatched Vulns in Shopify", "Insufficient Controls for AWS"],
                                       ["Checkout Skimming", "Shared Admin Account Takeover"],
                                       ["Lambda Key Leakage", "Seasonal Staff Account Misuse"]]),
    "saas_25": ("Unauthorized Access to PII", [["Data Breach (Insufficient Measures)", "DoS Attack"],
                                              ["GitHub Secret Exposure", "Engineer Production Access Abuse"],
                                              ["Tenant Isolation Failure", "Auth0 Misconfiguration"]]),
}

GENERIC_TITLES = {
    "health_15": ["Unauthorized Access", "Data Breach", "Malware Infection"],
    "fintech_30": ["Unauthorized Access", "Data Breach", "Insecure Third-Party Vendors"],
    "mfg_40": ["Unauthorized Access", "Data Breach", "Malware Infection"],
    "retail_20": ["Unauthorized Access", "Data Breach", "Phishing Attacks"],
    "saas_25": ["Unauthorized Access", "Data Leakage", "Insecure Code"],
}

LEVELS = [("High", "High"), ("High", "Medium"), ("Medium", "Medium")]


def single_output(p, titles, specific):
    mark = MARK[p["profile_id"]]
    content = SPECIFIC[p["profile_id"]] if specific else generic_content(p)
    threats = []
    for t in titles:
        if specific:
            threats.append(threat(t, "Attackers targeting " + p["industry"].lower() + " organizations",
                                  ["vector specific to " + p["systems"][0]], [p["systems"][0]],
                                  f"Grounded in the {mark}-related systems this organization runs."))
        else:
            threats.append(threat(t, "External attackers", ["common attack techniques"], ["IT systems"],
                                  "This threat affects organizations of all kinds."))
    risks = [risk(t + " Risk", lvl[0], lvl[1], "Rated from the threat and the control gaps found.", [t],
                  ["Access control" if i == 0 else "Monitoring"]) for i, (t, lvl) in enumerate(zip(titles, LEVELS))]
    recs = [rec("Address " + t.lower(), phase, cost, [t + " Risk"], "Reduces the linked risk.")
            for t, phase, cost in zip(titles, [30, 60, 90], ["$0–$1K", "$1K–$5K", "$2K–$8K"])]
    return {
        "org_profile": org_profile(p),
        "threat_model": {"threats": threats},
        "control_assessment": {"functions": content["controls"]},
        "risk_register": {"risks": risks},
        "recommendations": {"recommendations": recs},
        "report": {"exec_summary": content["summary"], "key_messages": content["messages"], "contradictions": []},
    }


# ---------------------------------------------------------------------------

def write(label, scripts, stub_config):
    d = os.path.join(DATA, "stub", label)
    os.makedirs(d, exist_ok=True)
    for role, variants in scripts.items():
        with open(os.path.join(d, role + ".json"), "w") as f:
            json.dump({"variants": variants}, f, indent=1, ensure_ascii=False)
            f.write("\n")
    with open(os.path.join(d, "stub.json"), "w") as f:
        json.dump(stub_config, f, indent=1)
        f.write("\n")


def main():
    profiles = load_profiles()
    for label, specific in (("specific", True), ("generic", False)):
        scripts = {}
        for pid, p in profiles.items():
            content = SPECIFIC[pid] if specific else generic_content(p)
            for role, output in multi_outputs(p, content).items():
                # Intake sees the questionnaire; later roles see the marker.
                match = pid if role == "risk_intake" else MARK[pid]
                scripts.setdefault(role, []).append({"match": match, "responses": [output]})
            if specific:
                shared, pairs = SPECIFIC_POOLS[pid]
                responses = [single_output(p, [shared] + pair, True) for pair in pairs]
            else:
                responses = [single_output(p, GENERIC_TITLES[pid], False)]
            scripts.setdefault("single_agent", []).append({"match": pid, "responses": responses})
        write(label, scripts, {"sleep_seconds": 0.0})


if __name__ == "__main__":
    main()
