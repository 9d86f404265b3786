// Entry point: login screen, then the citizen wizard or the officer queue.
// Every screen renders from the latest server responses only.

import { ApiError, NourIdClient } from "./api.js";
import { Dashboard, renderBucketTable, renderChart, renderToggle } from "./dashboard.js";
import { OfficerPortal } from "./officer.js";
import { CitizenWizard } from "./wizard.js";
import type { Granularity, QueueEntry } from "./types.js";

const OFFICER_POLL_MS = 5000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function errorBanner(error: unknown): HTMLElement {
  const message =
    error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  const banner = el("div", { class: "error-banner", role: "alert" }, message);
  const retry = el("button", {}, "dismiss");
  retry.addEventListener("click", () => banner.remove());
  banner.appendChild(retry);
  return banner;
}

class App {
  client: NourIdClient;
  root: HTMLElement;
  private timers: ReturnType<typeof setInterval>[] = [];

  constructor(baseUrl: string, root: HTMLElement) {
    this.client = new NourIdClient(baseUrl);
    this.root = root;
  }

  swap(...nodes: (Node | string)[]) {
    this.root.replaceChildren(...nodes);
  }

  start() {
    this.renderLogin();
  }

  dispose() {
    for (const timer of this.timers) clearInterval(timer);
    this.timers = [];
  }

  // --- auth screens -----------------------------------------------------

  renderLogin() {
    const email = el("input", { type: "email", placeholder: "email" });
    const password = el("input", { type: "password", placeholder: "password" });
    const login = el("button", {}, "log in");
    const register = el("button", {}, "create account");
    const panel = el(
      "section",
      { class: "card login" },
      el("h1", {}, "NourID+"),
      el("p", {}, "Digital Energy ID portal"),
      email,
      password,
      el("div", { class: "row" }, login, register),
    );
    login.addEventListener("click", async () => {
      try {
        const session = await this.client.login(email.value, password.value);
        if (session.role === "officer") await this.renderOfficer();
        else await this.renderWizard();
      } catch (error) {
        panel.appendChild(errorBanner(error));
      }
    });
    register.addEventListener("click", () => this.renderRegister());
    this.swap(panel);
  }

  renderRegister() {
    const fullName = el("input", { placeholder: "full name" });
    const email = el("input", { type: "email", placeholder: "email" });
    const phone = el("input", { placeholder: "phone" });
    const password = el("input", { type: "password", placeholder: "password (10+ chars)" });
    const submit = el("button", {}, "register");
    const back = el("button", {}, "back");
    const panel = el(
      "section",
      { class: "card register" },
      el("h1", {}, "Create account"),
      fullName,
      email,
      phone,
      password,
      el("div", { class: "row" }, submit, back),
    );
    submit.addEventListener("click", async () => {
      try {
        await this.client.register(fullName.value, email.value, phone.value, password.value);
        await this.client.login(email.value, password.value);
        await this.renderWizard();
      } catch (error) {
        panel.appendChild(errorBanner(error));
      }
    });
    back.addEventListener("click", () => this.renderLogin());
    this.swap(panel);
  }

  // --- citizen wizard -----------------------------------------------------

  async renderWizard() {
    const wizard = new CitizenWizard(this.client);
    try {
      await wizard.start();
    } catch (error) {
      this.swap(errorBanner(error));
      return;
    }
    this.renderWizardStep(wizard);
  }

  renderWizardStep(wizard: CitizenWizard) {
    const request = wizard.request;
    const header = el(
      "header",
      {},
      el("h1", {}, "DE-ID request"),
      el(
        "p",
        { class: "state-line", "data-state": request?.state ?? "Draft" },
        `state: ${request?.state ?? "Draft"} (v${request?.version ?? 0})`,
      ),
    );

    const step = wizard.step;
    let body: HTMLElement;
    if (step === "identity") body = this.identityStep(wizard);
    else if (step === "properties") body = this.propertiesStep(wizard);
    else if (step === "validate") body = this.validateStep(wizard);
    else if (step === "submit") body = this.submitStep(wizard);
    else if (step === "pending") body = this.pendingStep(wizard);
    else if (step === "issued") body = this.issuedStep(wizard);
    else body = this.rejectedStep(wizard);
    this.swap(el("section", { class: `card step-${step}` }, header, body));
  }

  identityStep(wizard: CitizenWizard): HTMLElement {
    const cin = el("input", { placeholder: "CIN (e.g. AB123456)" });
    const capture = el("button", { class: "capture" }, "scan face and verify");
    const body = el(
      "div",
      {},
      el("p", {}, "Upload your CIN and run the biometric check."),
      cin,
      capture,
    );
    capture.addEventListener("click", async () => {
      try {
        await wizard.verifyIdentity(cin.value);
        this.renderWizardStep(wizard);
      } catch (error) {
        body.appendChild(errorBanner(error));
      }
    });
    return body;
  }

  propertiesStep(wizard: CitizenWizard): HTMLElement {
    const list = el("div", { class: "parcel-list" }, "loading properties...");
    const cont = el("button", { disabled: "true" }, "continue") as HTMLButtonElement;
    const body = el("div", {}, el("p", {}, "Select the properties to cover."), list, cont);
    const selection = new Set<string>();

    wizard
      .loadProperties()
      .then((parcels) => {
        list.replaceChildren(
          ...parcels.map((parcel) => {
            const box = el("input", {
              type: "checkbox",
              id: parcel.parcel_id,
            }) as HTMLInputElement;
            box.addEventListener("change", () => {
              if (box.checked) selection.add(parcel.parcel_id);
              else selection.delete(parcel.parcel_id);
              cont.disabled = !wizard.canContinue([...selection]);
            });
            return el(
              "label",
              { class: "parcel", for: parcel.parcel_id },
              box,
              ` ${parcel.parcel_id} — ${parcel.property_type}, ${parcel.area_m2} m², ` +
                `${parcel.location.locality}`,
            );
          }),
        );
      })
      .catch((error) => body.appendChild(errorBanner(error)));

    cont.addEventListener("click", async () => {
      try {
        await wizard.selectProperties([...selection]);
        this.renderWizardStep(wizard);
      } catch (error) {
        body.appendChild(errorBanner(error));
      }
    });
    return body;
  }

  validateStep(wizard: CitizenWizard): HTMLElement {
    const run = el("button", {}, "retrieve and validate documents");
    const body = el(
      "div",
      {},
      el("p", {}, "Cadastral plan and ownership certificate are fetched and checked."),
      run,
    );
    run.addEventListener("click", async () => {
      try {
        await wizard.validateDocuments();
        this.renderWizardStep(wizard);
      } catch (error) {
        body.appendChild(errorBanner(error));
      }
    });
    return body;
  }

  submitStep(wizard: CitizenWizard): HTMLElement {
    const reports = wizard.request?.validation_reports ?? [];
    const rows = reports.map((report) =>
      el(
        "li",
        { class: report.verdict },
        `${report.subject_id}: ${report.verdict}`,
      ),
    );
    const submit = el("button", {}, "submit for approval");
    const body = el("div", {}, el("ul", { class: "reports" }, ...rows), submit);
    submit.addEventListener("click", async () => {
      try {
        await wizard.submit();
        this.renderWizardStep(wizard);
        void wizard.pollUntilDecided().then(() => this.renderWizardStep(wizard));
      } catch (error) {
        body.appendChild(errorBanner(error));
      }
    });
    return body;
  }

  pendingStep(wizard: CitizenWizard): HTMLElement {
    const refresh = el("button", {}, "refresh");
    const body = el(
      "div",
      {},
      el("p", {}, "Waiting for an SRM officer to review the request."),
      refresh,
    );
    refresh.addEventListener("click", async () => {
      await wizard.refresh();
      this.renderWizardStep(wizard);
    });
    return body;
  }

  issuedStep(wizard: CitizenWizard): HTMLElement {
    const body = el("div", {}, el("h2", {}, "DE-ID issued"));
    for (const [parcelId, deid] of Object.entries(wizard.request?.deids ?? {})) {
      const img = el("img", {
        class: "qr",
        alt: `QR for ${deid}`,
        src: this.client.qrSvgUrl(deid),
        width: "240",
        height: "240",
      });
      const open = el("button", { "data-deid": deid }, "open dashboard");
      open.addEventListener("click", () => void this.renderDashboard(deid));
      body.appendChild(
        el(
          "div",
          { class: "deid-card", "data-deid": deid },
          el("h3", {}, deid),
          el("p", {}, `parcel ${parcelId}`),
          img,
          open,
        ),
      );
    }
    return body;
  }

  rejectedStep(wizard: CitizenWizard): HTMLElement {
    const reason = wizard.request?.decision?.reason ?? "no reason recorded";
    return el(
      "div",
      {},
      el("h2", {}, "Request rejected"),
      el("p", { class: "reject-reason" }, reason),
      el("p", {}, "You can start a new request after resolving the issue."),
    );
  }

  // --- dashboard ---------------------------------------------------------

  async renderDashboard(deid: string) {
    const dashboard = new Dashboard(this.client, deid);
    const chartHost = el("div", { class: "chart-host" });
    const tableHost = el("div", { class: "table-host" });
    let toggleHost = el("div", {});

    const rerender = async (granularity: Granularity) => {
      await dashboard.load(granularity);
      const view = dashboard.view!;
      chartHost.replaceChildren(renderChart(document, view, dashboard.forecast));
      tableHost.replaceChildren(renderBucketTable(document, view));
      const toggle = renderToggle(document, granularity, (next) => void rerender(next));
      toggleHost.replaceWith(toggle);
      toggleHost = toggle;
    };

    const record = await this.client.getDeid(deid);
    const panel = el(
      "section",
      { class: "card dashboard" },
      el("h1", {}, `Consumption — ${deid}`),
      el(
        "p",
        { class: "subsidy" },
        `subsidy tier ${record.subsidy.tier}: ${record.subsidy.rationale}`,
      ),
      toggleHost,
      chartHost,
      tableHost,
    );
    this.swap(panel);
    await rerender("day");
    await dashboard.loadForecast();
    await rerender(dashboard.granularity);
  }

  // --- officer portal ------------------------------------------------------

  async renderOfficer() {
    const portal = new OfficerPortal(this.client);
    const tableHost = el("div", { class: "queue-host" });
    const banner = el("div", { class: "conflict-host" });

    const rerender = async () => {
      await portal.refresh();
      banner.replaceChildren(
        ...(portal.conflict
          ? [el("div", { class: "conflict-banner", role: "alert" }, portal.conflict)]
          : []),
      );
      tableHost.replaceChildren(this.queueTable(portal, rerender));
    };

    const panel = el(
      "section",
      { class: "card officer" },
      el("h1", {}, "Pending DE-ID requests"),
      banner,
      tableHost,
    );
    this.swap(panel);
    await rerender();
    this.timers.push(setInterval(() => void rerender(), OFFICER_POLL_MS));
  }

  queueTable(portal: OfficerPortal, rerender: () => Promise<void>): HTMLElement {
    if (!portal.queue.length) return el("p", { class: "empty-queue" }, "queue is empty");
    const table = el("table", { class: "queue" });
    const head = table.insertRow();
    for (const label of ["submitted", "request", "CIN", "parcels", "documents", ""]) {
      head.appendChild(el("th", {}, label));
    }
    for (const entry of portal.queue) {
      const row = table.insertRow();
      row.dataset.requestId = entry.request_id;
      row.insertCell().textContent = entry.submitted_at;
      row.insertCell().textContent = entry.request_id.slice(0, 8);
      row.insertCell().textContent = entry.cin;
      row.insertCell().textContent = entry.selected_parcels.join(", ");
      row.insertCell().textContent = entry.reports_valid ? "valid" : "invalid";
      const actions = row.insertCell();
      const approve = el("button", { class: "approve" }, "approve");
      const reject = el("button", { class: "reject" }, "reject");
      const reason = el("input", { placeholder: "rejection reason" }) as HTMLInputElement;
      approve.addEventListener("click", async () => {
        const ok = await portal.decide(entry, "approve");
        if (!ok) await rerender();
        else await rerender();
      });
      reject.addEventListener("click", async () => {
        await portal.decide(entry, "reject", reason.value);
        await rerender();
      });
      actions.append(approve, reject, reason);
    }
    return table;
  }
}

export function mount(baseUrl: string, root: HTMLElement): App {
  const app = new App(baseUrl, root);
  app.start();
  return app;
}

declare global {
  interface Window {
    NOURID_API_BASE?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(
    window.NOURID_API_BASE ?? "http://127.0.0.1:8462",
    document.getElementById("app")!,
  );
}
