/** The reporting wizard: metadata form, step-wise composer driven by the
 * server's suggestion sets, optional screenshot confirmation, and the
 * final report view.
 *
 * Every rendered component row corresponds one-to-one with a server
 * SuggestionEntry; the fallback banner mirrors the provenance flag. A
 * failed network call keeps the draft intact so the reporter can retry.
 */

import {
  ACTIONS,
  AddStepBody,
  ApiError,
  AppRef,
  COMPONENT_TYPES,
  CreateSessionBody,
  LOCATIONS,
  ReportDoc,
  StepDoc,
  SuggestionEntry,
  SuggestionSet,
  SWIPE_DIRECTIONS,
} from './api';
import { Store } from './state';

export interface Api {
  listApps(): Promise<AppRef[]>;
  createSession(body: CreateSessionBody): Promise<string>;
  getSuggestions(sessionId: string, action: string): Promise<SuggestionSet>;
  getConfirmations(sessionId: string, descriptorId: string, objectIndex: number): Promise<string[]>;
  addStep(sessionId: string, body: AddStepBody): Promise<{ steps: StepDoc[] }>;
  finalize(sessionId: string): Promise<number>;
  getReport(reportId: number): Promise<ReportDoc>;
  shotUrl(digest: string): string;
}

interface Draft {
  action: string;
  entry: SuggestionEntry | null;
  manualOpen: boolean;
  manualType: string;
  manualText: string;
  manualLocation: string;
  typedText: string;
  swipeDirection: string;
  note: string;
  confirmations: string[];
  confirmedShot: string | null;
}

export interface WizardState {
  phase: 'metadata' | 'compose' | 'final';
  apps: AppRef[];
  appIndex: number;
  reporterName: string;
  deviceName: string;
  orientation: string;
  title: string;
  description: string;
  sessionId: string | null;
  steps: StepDoc[];
  suggestions: SuggestionSet | null;
  draft: Draft;
  pending: boolean;
  error: string | null;
  errorField: string | null;
  reportId: number | null;
  report: ReportDoc | null;
}

function emptyDraft(): Draft {
  return {
    action: '',
    entry: null,
    manualOpen: false,
    manualType: '',
    manualText: '',
    manualLocation: '',
    typedText: '',
    swipeDirection: '',
    note: '',
    confirmations: [],
    confirmedShot: null,
  };
}

function initialState(): WizardState {
  return {
    phase: 'metadata',
    apps: [],
    appIndex: 0,
    reporterName: '',
    deviceName: '',
    orientation: 'PORTRAIT',
    title: '',
    description: '',
    sessionId: null,
    steps: [],
    suggestions: null,
    draft: emptyDraft(),
    pending: false,
    error: null,
    errorField: null,
    reportId: null,
    report: null,
  };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function option(value: string, label?: string): HTMLOptionElement {
  const opt = el('option', { value }, label ?? value);
  return opt;
}

/** Render one suggestion set as a panel: the fallback banner (only when
 * the server says so) plus exactly one selectable row per entry. Exported
 * so contract tests drive the same code the wizard uses. */
export function renderSuggestionPanel(
  sset: SuggestionSet,
  shotUrl: (digest: string) => string,
  onPick?: (entry: SuggestionEntry) => void,
): HTMLElement {
  const panel = el('div', { class: 'suggestion-panel' });
  if (sset.provenance === 'ALL_SCREENS_FALLBACK') {
    panel.appendChild(
      el('div', { class: 'fallback-banner' }, 'Showing components from all screens of the app'),
    );
  }
  const list = el('ul', { class: 'suggestions' });
  for (const entry of sset.entries) {
    const row = el('li', { class: entry.is_manual_option ? 'suggestion-row manual-option' : 'suggestion-row' });
    if (entry.thumbnail) {
      row.appendChild(el('img', { class: 'row-thumb', src: shotUrl(entry.thumbnail), alt: 'component' }));
    }
    if (entry.display_type) {
      row.appendChild(el('span', { class: 'row-type' }, entry.display_type));
    }
    row.appendChild(el('span', { class: 'row-text' }, entry.display_text));
    if (entry.display_location) {
      row.appendChild(el('span', { class: 'row-location' }, entry.display_location));
    }
    if (entry.disambiguator) {
      row.appendChild(el('span', { class: 'row-option' }, entry.disambiguator));
    }
    if (onPick) {
      row.addEventListener('click', () => onPick(entry));
    }
    list.appendChild(row);
  }
  panel.appendChild(list);
  return panel;
}

export class Wizard {
  readonly store = new Store<WizardState>(initialState());

  constructor(
    readonly root: HTMLElement,
    readonly api: Api,
  ) {
    this.store.subscribe(() => this.render());
    this.render();
    void this.refreshApps();
  }

  // -- actions -------------------------------------------------------------

  async refreshApps(): Promise<void> {
    try {
      const apps = await this.api.listApps();
      this.store.set({ apps, error: null });
    } catch (err) {
      this.fail(err);
    }
  }

  async createSession(): Promise<void> {
    const s = this.store.get();
    const app = s.apps[s.appIndex];
    if (!app || !s.title.trim() || s.pending) return;
    this.store.set({ pending: true, error: null, errorField: null });
    try {
      const sessionId = await this.api.createSession({
        app_id: app.app_id,
        version: app.version,
        reporter_name: s.reporterName,
        device_name: s.deviceName,
        orientation: s.orientation,
        title: s.title,
        description: s.description,
      });
      this.store.set({ sessionId, phase: 'compose', pending: false });
    } catch (err) {
      this.fail(err);
    }
  }

  async chooseAction(action: string): Promise<void> {
    const s = this.store.get();
    if (!s.sessionId) return;
    this.store.set({
      draft: { ...emptyDraft(), action, note: s.draft.note },
      suggestions: null,
      error: null,
      errorField: null,
    });
    if (!action) return;
    try {
      const suggestions = await this.api.getSuggestions(s.sessionId, action);
      this.store.set({ suggestions });
    } catch (err) {
      this.fail(err);
    }
  }

  async chooseEntry(entry: SuggestionEntry): Promise<void> {
    const s = this.store.get();
    if (!s.sessionId) return;
    if (entry.is_manual_option) {
      this.store.set({
        draft: { ...s.draft, entry: null, manualOpen: true, confirmations: [], confirmedShot: null },
      });
      return;
    }
    this.store.set({
      draft: { ...s.draft, entry, manualOpen: false, confirmations: [], confirmedShot: null },
    });
    try {
      const confirmations = await this.api.getConfirmations(
        s.sessionId,
        entry.descriptor_id as string,
        entry.object_index as number,
      );
      this.store.set({ draft: { ...this.store.get().draft, confirmations } });
    } catch (err) {
      this.fail(err);
    }
  }

  draftComplete(): boolean {
    const d = this.store.get().draft;
    if (!d.action) return false;
    if (d.entry) return true;
    return d.manualOpen && d.manualType !== '' && d.manualLocation !== '';
  }

  async commitStep(): Promise<void> {
    const s = this.store.get();
    if (!s.sessionId || s.pending || !this.draftComplete()) return;
    const d = s.draft;
    const body: AddStepBody = { action: d.action };
    if (d.entry) {
      body.target = {
        descriptor_id: d.entry.descriptor_id as string,
        object_index: d.entry.object_index as number,
        state_id: d.entry.state_id as string,
      };
    } else {
      body.manual = {
        component_type: d.manualType,
        text: d.manualText,
        relative_location: d.manualLocation,
      };
    }
    if (d.action === 'TYPE' && d.typedText) body.entered_text = d.typedText;
    if (d.action === 'SWIPE' && d.swipeDirection) body.direction = d.swipeDirection;
    if (d.note) body.note = d.note;
    if (d.confirmedShot) body.confirmed_full_screenshot = d.confirmedShot;

    this.store.set({ pending: true, error: null, errorField: null });
    try {
      const result = await this.api.addStep(s.sessionId, body);
      // draft is cleared only on success; a failure keeps it for retry
      this.store.set({ steps: result.steps, draft: emptyDraft(), suggestions: null, pending: false });
    } catch (err) {
      this.fail(err);
    }
  }

  async finalize(): Promise<void> {
    const s = this.store.get();
    if (!s.sessionId || s.pending || s.steps.length === 0) return;
    this.store.set({ pending: true, error: null });
    try {
      const reportId = await this.api.finalize(s.sessionId);
      const report = await this.api.getReport(reportId);
      this.store.set({ reportId, report, phase: 'final', pending: false });
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.store.set({ pending: false, error: err.message, errorField: err.field ?? null });
    } else {
      this.store.set({ pending: false, error: String(err), errorField: null });
    }
  }

  // -- rendering ------------------------------------------------------------

  private render(): void {
    const s = this.store.get();
    this.root.textContent = '';
    const wrap = el('div', { class: 'wizard' });
    if (s.error) {
      wrap.appendChild(el('div', { class: 'error-banner' }, s.error));
    }
    if (s.phase === 'metadata') {
      wrap.appendChild(this.renderMetadataForm(s));
    } else if (s.phase === 'compose') {
      wrap.appendChild(this.renderComposer(s));
    } else {
      wrap.appendChild(this.renderFinalReport(s));
    }
    this.root.appendChild(wrap);
  }

  private fieldError(s: WizardState, field: string): HTMLElement | null {
    if (s.errorField === field && s.error) {
      return el('span', { class: 'field-error' }, s.error);
    }
    return null;
  }

  private labelled(labelText: string, control: HTMLElement, error?: HTMLElement | null): HTMLElement {
    const row = el('label', { class: 'form-row' });
    row.appendChild(el('span', { class: 'form-label' }, labelText));
    row.appendChild(control);
    if (error) row.appendChild(error);
    return row;
  }

  private renderMetadataForm(s: WizardState): HTMLElement {
    const form = el('section', { class: 'metadata-form' });
    form.appendChild(el('h2', {}, 'Report a bug'));

    const appSelect = el('select', { id: 'app-select' });
    s.apps.forEach((app, i) => {
      const opt = option(String(i), `${app.app_id} ${app.version}`);
      if (i === s.appIndex) opt.selected = true;
      appSelect.appendChild(opt);
    });
    appSelect.addEventListener('change', () => {
      this.store.set({ appIndex: Number(appSelect.value) });
    });
    form.appendChild(this.labelled('App', appSelect));

    const name = el('input', { id: 'reporter-name', value: s.reporterName }) as HTMLInputElement;
    name.addEventListener('change', () => this.store.set({ reporterName: name.value }));
    form.appendChild(this.labelled('Your name', name));

    const device = el('input', { id: 'device-name', value: s.deviceName }) as HTMLInputElement;
    device.addEventListener('change', () => this.store.set({ deviceName: device.value }));
    form.appendChild(this.labelled('Device', device));

    const orientation = el('select', { id: 'orientation' });
    for (const value of ['PORTRAIT', 'LANDSCAPE']) {
      const opt = option(value);
      if (value === s.orientation) opt.selected = true;
      orientation.appendChild(opt);
    }
    orientation.addEventListener('change', () => this.store.set({ orientation: orientation.value }));
    form.appendChild(this.labelled('Orientation', orientation));

    const title = el('input', { id: 'title', value: s.title }) as HTMLInputElement;
    title.addEventListener('change', () => this.store.set({ title: title.value }));
    form.appendChild(this.labelled('Title', title, this.fieldError(s, 'title')));

    const description = el('textarea', { id: 'description' }) as HTMLTextAreaElement;
    description.value = s.description;
    description.addEventListener('change', () => this.store.set({ description: description.value }));
    form.appendChild(this.labelled('What happened?', description));

    const create = el('button', { id: 'create-session' }, 'Start entering steps') as HTMLButtonElement;
    create.disabled = !s.title.trim() || s.apps.length === 0 || s.pending;
    create.addEventListener('click', () => void this.createSession());
    form.appendChild(create);
    return form;
  }

  private renderComposer(s: WizardState): HTMLElement {
    const section = el('section', { class: 'composer' });
    section.appendChild(el('h2', {}, 'Steps to reproduce'));

    const done = el('ol', { class: 'steps' });
    for (const step of s.steps) {
      const bits: string[] = [`${step.action.kind}`];
      if (step.entered_text) bits.push(`"${step.entered_text}"`);
      if (step.note) bits.push(`(${step.note})`);
      done.appendChild(el('li', {}, bits.join(' ')));
    }
    section.appendChild(done);

    const actionSelect = el('select', { id: 'action-select' });
    actionSelect.appendChild(option('', 'Choose an action'));
    for (const action of ACTIONS) {
      const opt = option(action);
      if (action === s.draft.action) opt.selected = true;
      actionSelect.appendChild(opt);
    }
    actionSelect.addEventListener('change', () => void this.chooseAction(actionSelect.value));
    section.appendChild(this.labelled('Action', actionSelect));

    if (s.draft.action === 'TYPE') {
      const typed = el('input', { id: 'typed-text', value: s.draft.typedText }) as HTMLInputElement;
      typed.addEventListener('change', () =>
        this.store.set({ draft: { ...this.store.get().draft, typedText: typed.value } }),
      );
      section.appendChild(this.labelled('Text you typed', typed, this.fieldError(s, 'entered_text')));
    }
    if (s.draft.action === 'SWIPE') {
      const direction = el('select', { id: 'swipe-direction' });
      direction.appendChild(option('', 'Direction'));
      for (const dir of SWIPE_DIRECTIONS) {
        const opt = option(dir);
        if (dir === s.draft.swipeDirection) opt.selected = true;
        direction.appendChild(opt);
      }
      direction.addEventListener('change', () =>
        this.store.set({ draft: { ...this.store.get().draft, swipeDirection: direction.value } }),
      );
      section.appendChild(this.labelled('Direction', direction));
    }

    if (s.suggestions) {
      section.appendChild(
        renderSuggestionPanel(s.suggestions, (d) => this.api.shotUrl(d), (entry) => void this.chooseEntry(entry)),
      );
    } else if (s.draft.action) {
      section.appendChild(el('div', { class: 'loading' }, 'Loading components…'));
    }

    if (s.draft.entry) {
      const chosen = s.draft.entry;
      section.appendChild(
        el(
          'div',
          { class: 'chosen-entry' },
          `${chosen.display_type ?? ''} ${chosen.display_text}${chosen.disambiguator ? ` ${chosen.disambiguator}` : ''}`.trim(),
        ),
      );
      if (s.draft.confirmations.length > 0) {
        const gallery = el('div', { class: 'confirm-gallery' });
        gallery.appendChild(el('p', {}, 'Which screen were you on? Click to confirm (optional).'));
        for (const digest of s.draft.confirmations) {
          const img = el('img', {
            src: this.api.shotUrl(digest),
            class: digest === s.draft.confirmedShot ? 'confirm-shot selected' : 'confirm-shot',
            alt: 'screen',
          });
          img.addEventListener('click', () =>
            this.store.set({ draft: { ...this.store.get().draft, confirmedShot: digest } }),
          );
          gallery.appendChild(img);
        }
        section.appendChild(gallery);
      }
    }

    if (s.draft.manualOpen) {
      const manual = el('div', { class: 'manual-fields' });
      const typeSelect = el('select', { id: 'manual-type' });
      typeSelect.appendChild(option('', 'Component type'));
      for (const t of COMPONENT_TYPES) {
        const opt = option(t);
        if (t === s.draft.manualType) opt.selected = true;
        typeSelect.appendChild(opt);
      }
      typeSelect.addEventListener('change', () =>
        this.store.set({ draft: { ...this.store.get().draft, manualType: typeSelect.value } }),
      );
      manual.appendChild(this.labelled('Type of the component', typeSelect));

      const text = el('input', { id: 'manual-text', value: s.draft.manualText }) as HTMLInputElement;
      text.addEventListener('change', () =>
        this.store.set({ draft: { ...this.store.get().draft, manualText: text.value } }),
      );
      manual.appendChild(this.labelled('Text on the component', text));

      const location = el('select', { id: 'manual-location' });
      location.appendChild(option('', 'Where on the screen'));
      for (const loc of LOCATIONS) {
        const opt = option(loc);
        if (loc === s.draft.manualLocation) opt.selected = true;
        location.appendChild(opt);
      }
      location.addEventListener('change', () =>
        this.store.set({ draft: { ...this.store.get().draft, manualLocation: location.value } }),
      );
      manual.appendChild(this.labelled('Relative location', location));
      section.appendChild(manual);
    }

    const note = el('input', { id: 'step-note', value: s.draft.note }) as HTMLInputElement;
    note.addEventListener('change', () =>
      this.store.set({ draft: { ...this.store.get().draft, note: note.value } }),
    );
    section.appendChild(this.labelled('Anything unusual? (optional)', note));

    const commit = el('button', { id: 'commit-step' }, 'Add step') as HTMLButtonElement;
    commit.disabled = s.pending || !this.draftComplete();
    commit.addEventListener('click', () => void this.commitStep());
    section.appendChild(commit);

    const finalize = el('button', { id: 'finalize' }, 'Finish report') as HTMLButtonElement;
    finalize.disabled = s.pending || s.steps.length === 0;
    if (s.steps.length === 0) finalize.title = 'Add at least one step first';
    finalize.addEventListener('click', () => void this.finalize());
    section.appendChild(finalize);

    return section;
  }

  private renderFinalReport(s: WizardState): HTMLElement {
    const section = el('section', { class: 'final-report' });
    section.appendChild(el('h2', {}, 'Report filed'));
    section.appendChild(el('p', { id: 'report-id' }, `Report #${s.reportId ?? ''}`));
    if (!s.report) return section;

    const pre = el('div', { class: 'preliminary' });
    pre.appendChild(el('h3', {}, s.report.title));
    pre.appendChild(el('p', {}, s.report.device_name));
    pre.appendChild(el('p', {}, s.report.description));
    section.appendChild(pre);

    const table = el('table', { class: 'report-steps' });
    const head = el('tr');
    for (const col of ['#', 'Action', 'Type', 'Location', 'Source unit', 'Screenshot']) {
      head.appendChild(el('th', {}, col));
    }
    table.appendChild(el('thead')).appendChild(head);
    const body = el('tbody');
    for (const row of s.report.derived) {
      const tr = el('tr');
      tr.appendChild(el('td', {}, String(row.step_index)));
      tr.appendChild(el('td', {}, row.action.kind + (row.action.text ? ` "${row.action.text}"` : '')));
      tr.appendChild(el('td', {}, row.component_type));
      tr.appendChild(el('td', {}, row.location));
      tr.appendChild(el('td', {}, row.source_unit));
      const cell = el('td');
      if (row.component_screenshot) {
        cell.appendChild(el('img', { src: this.api.shotUrl(row.component_screenshot), alt: 'component' }));
      }
      tr.appendChild(cell);
      body.appendChild(tr);
    }
    table.appendChild(body);
    section.appendChild(table);

    const trail = el('div', { class: 'trail' });
    for (const digest of s.report.full_screenshots) {
      trail.appendChild(el('img', { src: this.api.shotUrl(digest), alt: 'screen' }));
    }
    section.appendChild(trail);
    return section;
  }
}
