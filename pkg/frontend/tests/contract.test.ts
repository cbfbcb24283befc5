/** Contract fidelity: the suggestion panel renders exactly the entries a
 * recorded server response carries — one row per entry, no additions, no
 * omissions — with Option # suffixes and the fallback banner. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, test, vi } from 'vitest';

import type { SuggestionSet } from '../src/api';
import { renderSuggestionPanel, Wizard } from '../src/wizard';

const here = dirname(fileURLToPath(import.meta.url));

function fixture(name: string): SuggestionSet {
  return JSON.parse(readFileSync(join(here, 'fixtures', `${name}.json`), 'utf-8'));
}

const shotUrl = (digest: string) => `/shots/${digest}.png`;

function textOf(row: Element, selector: string): string | null {
  const node = row.querySelector(selector);
  return node ? node.textContent : null;
}

describe.each(['suggestions_state_scoped', 'suggestions_fallback', 'suggestions_duplicates'])(
  'rendering of %s',
  (name) => {
    const sset = fixture(name);

    test('renders one row per entry, in order', () => {
      const panel = renderSuggestionPanel(sset, shotUrl);
      const rows = [...panel.querySelectorAll('li.suggestion-row')];
      expect(rows.length).toBe(sset.entries.length);
      rows.forEach((row, i) => {
        const entry = sset.entries[i]!;
        expect(textOf(row, '.row-text')).toBe(entry.display_text);
        if (entry.display_type) {
          expect(textOf(row, '.row-type')).toBe(entry.display_type);
        } else {
          expect(row.querySelector('.row-type')).toBeNull();
        }
        if (entry.display_location) {
          expect(textOf(row, '.row-location')).toBe(entry.display_location);
        }
        if (entry.disambiguator) {
          expect(textOf(row, '.row-option')).toBe(entry.disambiguator);
        } else {
          expect(row.querySelector('.row-option')).toBeNull();
        }
        if (entry.thumbnail) {
          expect(row.querySelector('img.row-thumb')?.getAttribute('src')).toBe(shotUrl(entry.thumbnail));
        } else {
          expect(row.querySelector('img.row-thumb')).toBeNull();
        }
        expect(row.classList.contains('manual-option')).toBe(entry.is_manual_option);
      });
    });

    test('fallback banner mirrors provenance', () => {
      const panel = renderSuggestionPanel(sset, shotUrl);
      const banner = panel.querySelector('.fallback-banner');
      if (sset.provenance === 'ALL_SCREENS_FALLBACK') {
        expect(banner).not.toBeNull();
      } else {
        expect(banner).toBeNull();
      }
    });

    test('exactly one manual option, rendered last', () => {
      const manualRows = sset.entries.filter((e) => e.is_manual_option);
      expect(manualRows.length).toBe(1);
      const panel = renderSuggestionPanel(sset, shotUrl);
      const rows = [...panel.querySelectorAll('li.suggestion-row')];
      expect(rows.at(-1)!.classList.contains('manual-option')).toBe(true);
    });
  },
);

test('duplicate fixture carries consecutive Option numbers', () => {
  const sset = fixture('suggestions_duplicates');
  const labels = sset.entries
    .filter((e) => e.display_text === 'Delete')
    .map((e) => e.disambiguator);
  expect(labels).toEqual(['Option #1', 'Option #2', 'Option #3']);
});

test('a failed addStep keeps the draft for retry', async () => {
  const sset = fixture('suggestions_state_scoped');
  const api = {
    listApps: vi.fn().mockResolvedValue([{ app_id: 'calc', version: '1.0' }]),
    createSession: vi.fn().mockResolvedValue('S1'),
    getSuggestions: vi.fn().mockResolvedValue(sset),
    getConfirmations: vi.fn().mockResolvedValue([]),
    addStep: vi.fn().mockRejectedValue(new Error('connection reset')),
    finalize: vi.fn(),
    getReport: vi.fn(),
    shotUrl,
  };
  const root = document.createElement('div');
  document.body.appendChild(root);
  const wizard = new Wizard(root, api);
  await vi.waitFor(() => expect(wizard.store.get().apps.length).toBe(1));
  wizard.store.set({ title: 'draft survives' });
  await wizard.createSession();
  await wizard.chooseAction('CLICK');
  const entry = sset.entries.find((e) => !e.is_manual_option)!;
  await wizard.chooseEntry(entry);
  wizard.store.set({ draft: { ...wizard.store.get().draft, note: 'precious note' } });

  await wizard.commitStep();

  const state = wizard.store.get();
  expect(state.error).toContain('connection reset');
  expect(state.steps.length).toBe(0);
  expect(state.draft.entry).toEqual(entry);
  expect(state.draft.note).toBe('precious note');
  expect((root.querySelector('#step-note') as HTMLInputElement).value).toBe('precious note');
  root.remove();
});
